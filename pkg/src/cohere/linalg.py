"""Dense complex-matrix kernel.

Density matrices, the dephasing map, fidelity, entropies and Kronecker
products. Everything works on plain ``numpy`` arrays; :class:`DensityMatrix`
is a validated, read-only wrapper around one.
"""

import numpy as np

from .errors import DimensionError, InvalidStateError, ResourceCapError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_HERMITIAN_TOL = 1e-10
TENSOR_CAP = 4096


def as_matrix(m):
    """Return ``m`` as a 2-D complex array, rejecting NaN/Inf and empty shapes."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError("matrix has non-finite entries")
    return a


def _square(m):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace matrix.

    Construction validates the three invariants and fails loudly instead of
    projecting onto the set of states.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat):
        a = _square(mat).copy()
        herm = np.max(np.abs(a - a.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (residual {herm:.3g})")
        tr = float(np.trace(a).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace is {tr!r}, expected 1")
        lmin = np.linalg.eigvalsh(a)[0]
        if lmin < -PSD_TOL:
            raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lmin:.3g})")
        a.setflags(write=False)
        self._mat = a

    @property
    def mat(self):
        return self._mat

    @property
    def dim(self):
        return self._mat.shape[0]

    def diag(self):
        return self._mat.diagonal().real.copy()

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._mat
        return self._mat.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self._mat, other._mat)

    __hash__ = None


def as_density(rho):
    """Coerce ``rho`` to a :class:`DensityMatrix` (no-op if it already is one)."""
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(rho)


def _raw(m):
    if isinstance(m, DensityMatrix):
        return m.mat
    return as_matrix(m)


def dephase(m):
    """Zero the off-diagonal entries of a square matrix."""
    a = _square(_raw(m))
    return np.diag(np.diag(a))


def max_coherent(m):
    """The maximally coherent state of dimension ``m``: every entry is ``1/m``."""
    if int(m) != m or m < 1:
        raise DimensionError(f"dimension must be a positive integer, got {m!r}")
    m = int(m)
    return DensityMatrix(np.full((m, m), 1.0 / m, dtype=complex))


def isotropic_qubit(lam):
    """``lam * Psi_2 + (1 - lam) * I/2``, the one-parameter family of qubit states."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam!r}")
    return DensityMatrix(np.array([[0.5, lam / 2], [lam / 2, 0.5]], dtype=complex))


def hermitian_eig(m):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    a = _square(_raw(m))
    res = np.max(np.abs(a - a.conj().T))
    if res > EIG_HERMITIAN_TOL:
        raise InvalidStateError(f"matrix is not Hermitian (residual {res:.3g})")
    return np.linalg.eigh((a + a.conj().T) / 2)


def psd_sqrt(m):
    """Square root of a PSD matrix.

    Eigenvalues below ``1e-14`` times the largest are set to zero, so that
    round-off on a rank-deficient input does not leak into the root.
    """
    w, v = hermitian_eig(m)
    w = np.where(w > 1e-14 * max(w[-1], 0.0), w, 0.0)
    w = np.sqrt(w)
    return (v * w) @ v.conj().T


def fidelity(a, b):
    """Squared fidelity ``||sqrt(a) sqrt(b)||_1 ** 2`` between two states.

    When either state is pure this reduces to ``Tr(a b)``, which is used
    directly because it avoids the round-off of two matrix square roots.
    """
    a, b = as_density(a), as_density(b)
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    overlap = float(np.sum(a.mat * b.mat.T).real)
    if _is_pure(a) or _is_pure(b):
        f = overlap
    else:
        f = trace_norm(psd_sqrt(a) @ psd_sqrt(b)) ** 2
    return float(min(max(f, 0.0), 1.0))


def _is_pure(rho, tol=1e-12):
    return abs(float(np.sum(np.abs(rho.mat) ** 2)) - 1.0) <= tol


def shannon_entropy(p):
    """Shannon entropy in bits of a probability vector, with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)) + 0.0)


def von_neumann_entropy(rho):
    """Entropy in bits of a density matrix."""
    rho = as_density(rho)
    a = rho.mat
    if np.count_nonzero(a - np.diag(np.diag(a))) == 0:
        return shannon_entropy(np.diag(a).real)
    return shannon_entropy(np.linalg.eigvalsh(a))


def trace_norm(m):
    """Schatten-1 norm: the sum of singular values."""
    a = _square(_raw(m))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def entrywise_abs(m):
    """Entrywise modulus ``|m_ij|`` as a real matrix."""
    return np.abs(_raw(m))


def tensor(a, b, cap=TENSOR_CAP):
    """Kronecker product with row index ``(i, k)`` and column index ``(j, l)``.

    Entry ``[(i, k), (j, l)]`` of the result is ``a[i, j] * b[k, l]``; this is
    ``numpy.kron``'s layout.
    """
    a, b = _raw(a), _raw(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise ResourceCapError(f"tensor product of size {rows}x{cols} exceeds cap {cap}")
    return np.kron(a, b)


def tensor_power(rho, n, cap=TENSOR_CAP):
    """``rho`` tensored with itself ``n`` times, as a density matrix."""
    rho = as_density(rho)
    if n < 1:
        raise ValueError("number of copies must be at least 1")
    if rho.dim ** n > cap:
        raise ResourceCapError(f"dimension {rho.dim}**{n} exceeds cap {cap}")
    out = rho.mat
    for _ in range(n - 1):
        out = np.kron(out, rho.mat)
    return DensityMatrix(out)


def tensor_states(a, b, cap=TENSOR_CAP):
    """Tensor product of two states, returned as a :class:`DensityMatrix`."""
    return DensityMatrix(tensor(as_density(a), as_density(b), cap=cap))
