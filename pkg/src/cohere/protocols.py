"""Strictly incoherent channels, instruments and their Monte-Carlo simulation.

A Kraus operator ``K`` (``out_dim x in_dim``) is strictly incoherent iff it
has at most one nonzero entry in every row and every column. Such a ``K`` is
stored as ``sum_{i in J} d(i) |i><pi(i)|`` with ``J`` a set of output rows
and ``pi`` an injective map into the input columns.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError, NotSIOError
from .linalg import DensityMatrix, as_density, as_matrix, fidelity, max_coherent, shannon_entropy
from .measures import EDGE_TOL, coherence_partition, eta_argmax
from .rng import task_rng

COMPLETENESS_TOL = 1e-10
ZERO_TOL = 1e-12
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class KrausStructure:
    """Monomial form of one Kraus operator: ``K[rows[k], cols[k]] = amps[k]``."""

    rows: tuple
    cols: tuple
    amps: tuple

    def mapping(self):
        return dict(zip(self.rows, self.cols))


@dataclass(frozen=True)
class SioChannel:
    in_dim: int
    out_dim: int
    kraus: tuple
    structure: tuple

    def __call__(self, rho):
        return apply_channel(self, rho)

    def __len__(self):
        return len(self.kraus)


def _monomial(k, index, zero_tol):
    nz = np.abs(k) > zero_tol
    if np.any(nz.sum(axis=0) > 1) or np.any(nz.sum(axis=1) > 1):
        raise NotSIOError(f"monomial structure violated at Kraus {index}")
    rows, cols = np.nonzero(nz)
    return KrausStructure(
        rows=tuple(int(r) for r in rows),
        cols=tuple(int(c) for c in cols),
        amps=tuple(complex(k[r, c]) for r, c in zip(rows, cols)),
    )


def validate_sio(kraus, tol=COMPLETENESS_TOL, zero_tol=ZERO_TOL):
    """Check a raw Kraus list and return it as an :class:`SioChannel`.

    Raises :class:`NotSIOError` if ``sum K^dag K != I`` (within ``tol``) or
    if some operator has two nonzero entries in a row or a column.
    """
    ops = [as_matrix(k) for k in kraus]
    if not ops:
        raise NotSIOError("empty Kraus list")
    shape = ops[0].shape
    for a, k in enumerate(ops):
        if k.shape != shape:
            raise DimensionError(f"Kraus {a} has shape {k.shape}, expected {shape}")
    out_dim, in_dim = shape
    total = sum(k.conj().T @ k for k in ops)
    resid = float(np.max(np.abs(total - np.eye(in_dim))))
    if resid > tol:
        raise NotSIOError(f"completeness violated (residual {resid:.3g})")
    structure = tuple(_monomial(k, a, zero_tol) for a, k in enumerate(ops))
    frozen = []
    for k in ops:
        k = k.copy()
        k.setflags(write=False)
        frozen.append(k)
    return SioChannel(in_dim, out_dim, tuple(frozen), structure)


def apply_channel(ch, rho):
    rho = as_density(rho)
    if rho.dim != ch.in_dim:
        raise DimensionError(f"channel expects dimension {ch.in_dim}, got {rho.dim}")
    out = sum(k @ rho.mat @ k.conj().T for k in ch.kraus)
    return DensityMatrix((out + out.conj().T) / 2)


def outcome_probabilities(ch, rho):
    """``Tr[K_a rho K_a^dag]`` for every Kraus operator."""
    rho = as_density(rho)
    if rho.dim != ch.in_dim:
        raise DimensionError(f"channel expects dimension {ch.in_dim}, got {rho.dim}")
    p = np.array([np.real(np.trace(k @ rho.mat @ k.conj().T)) for k in ch.kraus])
    return np.clip(p, 0.0, None)


def post_state(ch, rho, index):
    rho = as_density(rho)
    k = ch.kraus[index]
    out = k @ rho.mat @ k.conj().T
    p = np.real(np.trace(out))
    if p <= PROB_FLOOR:
        raise ValueError(f"outcome {index} has probability {p:.3g}")
    out = out / p
    return DensityMatrix((out + out.conj().T) / 2)


@dataclass(frozen=True)
class InstrumentOutcome:
    index: int
    probability: float
    post_state: DensityMatrix


def sample_instrument(ch, rho, rng):
    """Draw one outcome of the instrument and return the normalised post state."""
    p = outcome_probabilities(ch, rho)
    if np.all(p < PROB_FLOOR):
        raise ValueError("every outcome has negligible probability; the channel is broken")
    a = int(rng.choice(len(p), p=p / p.sum()))
    return InstrumentOutcome(a, float(p[a]), post_state(ch, rho, a))


def _frame(rho):
    """Permutation-with-phase ``V`` moving the maximal pair to (0, 1), real and >= 0."""
    i, j, _ = eta_argmax(rho)
    dim = rho.dim
    order = [i, j] + [k for k in range(dim) if k not in (i, j)]
    v = np.zeros((dim, dim), dtype=complex)
    v[np.arange(dim), order] = 1.0
    phase = np.angle(rho.mat[i, j])
    v[1] *= np.exp(1j * phase)
    return v


def diagonal_filter(rho):
    """Diagonal-filtering instrument mapping ``rho`` onto a qubit.

    Outcome 0 succeeds with probability ``2 min(rho_ii, rho_jj)`` on the
    maximal-coherence pair and leaves ``[[1, eta], [eta, 1]] / 2``; every
    other outcome leaves ``|0><0|``. There are ``dim + 1`` outcomes.
    """
    rho = as_density(rho)
    v = _frame(rho)
    r = v @ rho.mat @ v.conj().T
    a, b = r[0, 0].real, r[1, 1].real
    low = min(a, b)
    dim = rho.dim
    ops = []
    k0 = np.zeros((2, dim), dtype=complex)
    k0[0, 0] = math.sqrt(low / a)
    k0[1, 1] = math.sqrt(low / b)
    ops.append(k0)
    k1 = np.zeros((2, dim), dtype=complex)
    k1[0, 0] = math.sqrt(1.0 - min(1.0, b / a))
    ops.append(k1)
    k2 = np.zeros((2, dim), dtype=complex)
    k2[0, 1] = math.sqrt(1.0 - min(1.0, a / b))
    ops.append(k2)
    for alpha in range(2, dim):
        k = np.zeros((2, dim), dtype=complex)
        k[0, alpha] = 1.0
        ops.append(k)
    return validate_sio([k @ v for k in ops])


def filter_protocol_fidelity(rho, n):
    """Average fidelity of filtering ``n`` copies and keeping the first success."""
    from .distillation import filter_failure_rate

    rho = as_density(rho)
    _, _, e = eta_argmax(rho)
    mu = filter_failure_rate(rho)
    return (1.0 + e) / 2 - (e / 2) * mu ** n


@dataclass(frozen=True)
class FilterSimulation:
    runs: int
    copies: int
    successes: int
    mean: float
    stderr: float
    analytic: float


def simulate_filter_protocol(rho, n, runs, seed, batch_size=10_000, workers=1):
    """Monte-Carlo estimate of the diagonal-filter protocol's fidelity.

    Each run applies the instrument to ``n`` copies; the first outcome-0 post
    state is output, otherwise the fixed state ``|0><0|``. Batch ``k`` draws
    from the stream ``(seed, k)``, so results do not depend on ``workers``.
    """
    rho = as_density(rho)
    if n < 1 or runs < 1:
        raise ValueError("n and runs must be positive")
    ch = diagonal_filter(rho)
    p = outcome_probabilities(ch, rho)
    p = p / p.sum()
    target = max_coherent(2)
    fail_state = DensityMatrix(np.diag([1.0, 0.0]))
    f_fail = fidelity(fail_state, target)
    f_success = fidelity(post_state(ch, rho, 0), target) if p[0] > PROB_FLOOR else f_fail

    sizes = [batch_size] * (runs // batch_size)
    if runs % batch_size:
        sizes.append(runs % batch_size)

    def batch(k):
        g = task_rng(seed, k)
        outcomes = g.choice(len(p), size=(sizes[k], n), p=p)
        return int(np.count_nonzero(np.any(outcomes == 0, axis=1)))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            successes = sum(pool.map(batch, range(len(sizes))))
    else:
        successes = sum(batch(k) for k in range(len(sizes)))
    frac = successes / runs
    mean = f_fail * (1 - frac) + f_success * frac
    spread = abs(f_success - f_fail)
    stderr = spread * math.sqrt(frac * (1 - frac) / runs)
    return FilterSimulation(runs, n, successes, mean, stderr, filter_protocol_fidelity(rho, n))


def pio_block_instrument(rho, edge_tol=EDGE_TOL):
    """Projective measurement onto the cliques of the coherence graph.

    Returns the instrument and the partition; outcome ``s`` occurs with
    probability ``P(s)`` and leaves the pure block state.
    """
    rho = as_density(rho)
    part = coherence_partition(rho, edge_tol=edge_tol)
    ops = []
    for block in part.blocks:
        proj = np.zeros((rho.dim, rho.dim), dtype=complex)
        proj[list(block), list(block)] = 1.0
        ops.append(proj)
    return validate_sio(ops), part


def block_rates(rho, edge_tol=EDGE_TOL):
    """``(P(s), S(dephased block state s))`` for every block, in bits."""
    rho = as_density(rho)
    part = coherence_partition(rho, edge_tol=edge_tol)
    d = rho.diag()
    probs = np.array(part.block_probs)
    rates = np.array([shannon_entropy(d[list(b)] / p) if p > 0 else 0.0
                      for b, p in zip(part.blocks, part.block_probs)])
    return probs, rates


def pio_rate_estimate(rho, n, rng, edge_tol=EDGE_TOL):
    """Empirical coherence bits per copy from the block-measurement protocol.

    The block measurement is sampled on ``n`` copies; each pure outcome
    state then yields ``S(dephased state)`` bits per copy, the asymptotic
    rate of pure-state distillation.
    """
    rho = as_density(rho)
    if n < 1:
        raise ValueError("n must be at least 1")
    ch, part = pio_block_instrument(rho, edge_tol)
    p = outcome_probabilities(ch, rho)
    counts = rng.multinomial(n, p / p.sum())
    _, rates = block_rates(rho, edge_tol)
    return float(math.fsum(c * r for c, r in zip(counts, rates)) / n)


def pio_rate_stderr(rho, n, edge_tol=EDGE_TOL):
    """Standard error of :func:`pio_rate_estimate` for ``n`` copies."""
    probs, rates = block_rates(rho, edge_tol)
    mean = float(probs @ rates)
    var = float(probs @ (rates - mean) ** 2)
    return math.sqrt(var / n)


def random_density(d, rank, rng):
    """``G G^dag / Tr(G G^dag)`` with ``G`` a ``d x rank`` complex Gaussian matrix."""
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real)


def random_sio(d, n_kraus, rng):
    """Random ``d -> d`` SIO channel from random permutations and phases.

    For every input index the squared amplitudes across the ``n_kraus``
    operators are Dirichlet(1, ..., 1), so completeness holds by construction.
    """
    if d < 1 or n_kraus < 1:
        raise ValueError("d and n_kraus must be positive")
    weights = rng.dirichlet(np.ones(n_kraus), size=d).T
    ops = []
    for alpha in range(n_kraus):
        perm = rng.permutation(d)
        phases = np.exp(2j * np.pi * rng.random(d))
        k = np.zeros((d, d), dtype=complex)
        k[perm, np.arange(d)] = np.sqrt(weights[alpha]) * phases
        ops.append(k)
    return validate_sio(ops)


def lift_compress(ch, d_prime):
    """Square ``d' x d'`` channel that reproduces ``ch`` on the leading block.

    The lifted Kraus operators embed each ``K`` in the top-left corner; one
    extra operator, the projector onto indices ``in_dim..d'-1``, restores
    completeness.
    """
    if d_prime < max(ch.in_dim, ch.out_dim):
        raise ValueError(f"d' = {d_prime} is smaller than max(in, out) = "
                         f"{max(ch.in_dim, ch.out_dim)}")
    ops = []
    for k in ch.kraus:
        big = np.zeros((d_prime, d_prime), dtype=complex)
        big[:ch.out_dim, :ch.in_dim] = k
        ops.append(big)
    if d_prime > ch.in_dim:
        pad = np.zeros((d_prime, d_prime), dtype=complex)
        idx = np.arange(ch.in_dim, d_prime)
        pad[idx, idx] = 1.0
        ops.append(pad)
    return validate_sio(ops)


def embed(rho, d_prime):
    """Place a ``d x d`` matrix in the top-left corner of a ``d' x d'`` zero matrix."""
    m = as_matrix(rho.mat if isinstance(rho, DensityMatrix) else rho)
    out = np.zeros((d_prime, d_prime), dtype=complex)
    out[:m.shape[0], :m.shape[1]] = m
    return out


def compress(sigma, m):
    """Leading ``m x m`` block of a square matrix."""
    s = as_matrix(sigma.mat if isinstance(sigma, DensityMatrix) else sigma)
    return s[:m, :m].copy()

