"""Exception hierarchy shared by every module."""


class CohereError(Exception):
    """Base class for all library errors."""


class InputError(CohereError, ValueError):
    """A state or channel file could not be parsed."""


class DimensionError(CohereError, ValueError):
    """Shapes or dimensions are inconsistent."""


class InvalidStateError(CohereError, ValueError):
    """A matrix fails the Hermitian / PSD / unit-trace checks."""


class ResourceCapError(CohereError):
    """A configured size or combinatorial budget would be exceeded."""


class NoAdmissiblePairError(CohereError, ValueError):
    """Fewer than two diagonal entries are nonzero, so no index pair exists."""


class CliqueViolationError(CohereError):
    """Coherence-graph components are not cliques at the chosen tolerance."""


class RankViolationError(CohereError):
    """A block of the coherence partition is not numerically rank one."""


class SolverError(CohereError):
    """The cone-program solver did not reach an optimal certificate."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class NotSIOError(CohereError, ValueError):
    """A Kraus list is not a valid strictly incoherent operation."""
