"""Coherence distillation: measures, SDP fidelities and SIO/PIO protocols."""

__version__ = "0.1.0"

from .errors import (
    CliqueViolationError,
    CohereError,
    DimensionError,
    InputError,
    InvalidStateError,
    NoAdmissiblePairError,
    NotSIOError,
    RankViolationError,
    ResourceCapError,
    SolverError,
)
from .linalg import (
    DensityMatrix,
    dephase,
    fidelity,
    isotropic_qubit,
    max_coherent,
    tensor,
    tensor_power,
)
from .measures import (
    coherence_partition,
    eta,
    eta_argmax,
    is_distillable,
    mu_k,
    q_measure,
    rel_entropy_coherence,
    trimmed_state,
)
from .distillation import (
    fidelity_mio_bit,
    fidelity_sio_bit,
    fidelity_sio_bit_multicopy,
    multicopy_bounds,
)
from .protocols import (
    diagonal_filter,
    lift_compress,
    random_density,
    random_sio,
    simulate_filter_protocol,
    validate_sio,
)
