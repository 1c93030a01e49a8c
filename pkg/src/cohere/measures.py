"""Coherence quantifiers built on the normalised matrix ``D^-1/2 rho D^-1/2``.

Indices are 0-based throughout. ``D`` denotes the diagonal part of ``rho``.
"""

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    CliqueViolationError,
    NoAdmissiblePairError,
    RankViolationError,
    ResourceCapError,
)
from .linalg import (
    DensityMatrix,
    as_density,
    shannon_entropy,
    von_neumann_entropy,
)

DIAG_ZERO_TOL = 1e-12
EDGE_TOL = 1e-7
RANK_TOL = 1e-7
TIE_TOL = 1e-12
SUBSET_BUDGET = 2_000_000


def _support(diag, diag_zero_tol):
    return diag > diag_zero_tol


def a_matrix(rho, diag_zero_tol=DIAG_ZERO_TOL):
    """``D^-1/2 rho D^-1/2`` with the inverse taken on the support of ``D``.

    Rows and columns whose diagonal entry is (numerically) zero are zeroed.
    """
    rho = as_density(rho)
    d = rho.diag()
    inv = np.zeros_like(d)
    supp = _support(d, diag_zero_tol)
    inv[supp] = 1.0 / np.sqrt(d[supp])
    a = inv[:, None] * rho.mat * inv[None, :]
    idx = np.flatnonzero(supp)
    a[idx, idx] = 1.0
    return a


def _ratio_matrix(rho, diag_zero_tol):
    d = rho.diag()
    supp = _support(d, diag_zero_tol)
    r = np.zeros((rho.dim, rho.dim))
    idx = np.flatnonzero(supp)
    if idx.size:
        sub = np.abs(rho.mat[np.ix_(idx, idx)]) / np.sqrt(np.outer(d[idx], d[idx]))
        np.fill_diagonal(sub, 0.0)
        r[np.ix_(idx, idx)] = np.minimum(sub, 1.0)
    return r, supp


def eta(rho, diag_zero_tol=DIAG_ZERO_TOL):
    """Maximal coherence: ``max |rho_ij| / sqrt(rho_ii rho_jj)`` over ``i != j``.

    Pairs with a zero diagonal entry are skipped; returns 0 when no pair is
    admissible.
    """
    r, _ = _ratio_matrix(as_density(rho), diag_zero_tol)
    return float(r.max()) if r.size else 0.0


def eta_argmax(rho, diag_zero_tol=DIAG_ZERO_TOL):
    """Return ``(i, j, eta)`` with ``i < j`` for a maximising pair.

    Among pairs within ``1e-12`` of the maximum, the one with the largest
    ``min(rho_ii, rho_jj)`` wins; remaining ties go to the lexicographically
    smallest pair.
    """
    rho = as_density(rho)
    r, supp = _ratio_matrix(rho, diag_zero_tol)
    if np.count_nonzero(supp) < 2:
        raise NoAdmissiblePairError("fewer than two nonzero diagonal entries")
    d = rho.diag()
    best = r.max()
    candidates = []
    for i, j in itertools.combinations(np.flatnonzero(supp), 2):
        if r[i, j] >= best - TIE_TOL:
            candidates.append((-min(d[i], d[j]), int(i), int(j)))
    _, i, j = min(candidates)
    return i, j, float(r[i, j])


def mu_k(rho, k, diag_zero_tol=DIAG_ZERO_TOL, budget=SUBSET_BUDGET):
    """``max log2 ||A_I||_inf`` over principal submatrices of size at most ``k``.

    Principal submatrices of a PSD matrix have operator norm no larger than
    the matrices containing them, so only subsets of size exactly
    ``min(k, dim)`` are enumerated.
    """
    rho = as_density(rho)
    dim = rho.dim
    if int(k) != k or not 1 <= k <= dim:
        raise ValueError(f"k must be an integer in [1, {dim}], got {k!r}")
    k = int(k)
    count = math.comb(dim, k)
    if count > budget:
        raise ResourceCapError(f"C({dim},{k}) = {count} subsets exceeds budget {budget}")
    a = a_matrix(rho, diag_zero_tol)
    best = 0.0
    for subset in itertools.combinations(range(dim), k):
        sub = a[np.ix_(subset, subset)]
        best = max(best, np.linalg.eigvalsh(sub)[-1])
    if best <= 0.0:
        return -math.inf
    return float(np.log2(best))


@dataclass(frozen=True)
class CoherencePartition:
    """Edges of the coherence graph, its clique blocks and the block states.

    ``edges`` holds unordered pairs ``(i, j)`` with ``i < j``. ``block_states``
    are the normalised principal blocks; a zero-weight block gets ``[[1]]``.
    """

    dim: int
    tolerance: float
    edges: frozenset
    blocks: tuple
    block_probs: tuple
    block_states: tuple

    @property
    def sizes(self):
        return tuple(len(b) for b in self.blocks)

    def is_trivial(self):
        return not self.edges


def coherence_partition(rho, edge_tol=EDGE_TOL, diag_zero_tol=DIAG_ZERO_TOL,
                        rank_tol=RANK_TOL):
    """Split the basis into the cliques of the coherence graph.

    An edge joins ``i`` and ``j`` when both diagonals are nonzero and
    ``|rho_ij| >= (1 - edge_tol) sqrt(rho_ii rho_jj)``. Components must be
    cliques and their blocks rank one, otherwise the tolerance misclassified
    an edge and an error is raised.
    """
    if not 0.0 < edge_tol < 1.0:
        raise ValueError("edge_tol must lie in (0, 1)")
    rho = as_density(rho)
    dim = rho.dim
    r, supp = _ratio_matrix(rho, diag_zero_tol)
    adj = (r >= 1.0 - edge_tol) & supp[:, None] & supp[None, :]
    np.fill_diagonal(adj, False)
    _, labels = connected_components(csr_matrix(adj), directed=False)

    blocks = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(i)
    ordered = sorted(blocks.values(), key=lambda b: b[0])

    edges = frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(adj))))
    d = rho.diag()
    probs, states = [], []
    for block in ordered:
        for i, j in itertools.combinations(block, 2):
            if not adj[i, j]:
                raise CliqueViolationError(
                    f"indices {i} and {j} are connected but not adjacent "
                    f"at edge_tol={edge_tol:g}")
        p = float(d[block].sum())
        probs.append(p)
        if len(block) == 1:
            # blocks with >1 index only arise from edges, so p > 0 there
            states.append(DensityMatrix(np.ones((1, 1))))
            continue
        sub = rho.mat[np.ix_(block, block)] / p
        w = np.linalg.eigvalsh(sub)
        if w[-2] > rank_tol * w[-1]:
            raise RankViolationError(
                f"block {block} has second eigenvalue {w[-2]:.3g} "
                f"(largest {w[-1]:.3g})")
        states.append(DensityMatrix(sub))
    return CoherencePartition(
        dim=dim,
        tolerance=edge_tol,
        edges=edges,
        blocks=tuple(tuple(b) for b in ordered),
        block_probs=tuple(probs),
        block_states=tuple(states),
    )


def trimmed_state(rho, part=None):
    """Keep the diagonal and within-block entries of ``rho``, zero the rest."""
    rho = as_density(rho)
    if part is None:
        part = coherence_partition(rho)
    if part.dim != rho.dim:
        raise ValueError("partition and state dimensions differ")
    mask = np.zeros((rho.dim, rho.dim), dtype=bool)
    for block in part.blocks:
        mask[np.ix_(block, block)] = True
    return DensityMatrix(np.where(mask, rho.mat, 0.0))


@dataclass(frozen=True)
class QDecomposition:
    """Two evaluations of Q: via von Neumann entropies and via Shannon entropies."""

    entropy_dephased: float
    entropy_trimmed: float
    shannon_diag: float
    shannon_blocks: float

    @property
    def value(self):
        return max(self.entropy_dephased - self.entropy_trimmed, 0.0)

    @property
    def shannon_value(self):
        return max(self.shannon_diag - self.shannon_blocks, 0.0)


def q_decomposition(rho, edge_tol=EDGE_TOL, part=None):
    rho = as_density(rho)
    if part is None:
        part = coherence_partition(rho, edge_tol=edge_tol)
    diag = rho.diag()
    return QDecomposition(
        entropy_dephased=shannon_entropy(diag),
        entropy_trimmed=von_neumann_entropy(trimmed_state(rho, part)),
        shannon_diag=shannon_entropy(diag),
        shannon_blocks=shannon_entropy(part.block_probs),
    )


def q_measure(rho, edge_tol=EDGE_TOL):
    """``S(dephased rho) - S(trimmed rho)`` in bits.

    This is the distillable coherence under strictly and physically
    incoherent operations. The trimmed state is a weighted sum of pure
    block states, so its entropy is the Shannon entropy of the block
    weights; that form is returned because it avoids an eigensolve and is
    exact on maximally coherent inputs. ``q_decomposition`` keeps both.
    """
    return q_decomposition(rho, edge_tol=edge_tol).shannon_value


def rel_entropy_coherence(rho):
    """``S(dephased rho) - S(rho)`` in bits."""
    rho = as_density(rho)
    return max(shannon_entropy(rho.diag()) - von_neumann_entropy(rho), 0.0)


class Verdict(str, enum.Enum):
    DISTILLABLE = "distillable"
    BOUND = "bound"
    INCOHERENT = "incoherent"


@dataclass(frozen=True)
class Distillability:
    verdict: Verdict
    eta: float
    pair: tuple = None


def is_distillable(rho, tol=1e-9, diag_zero_tol=DIAG_ZERO_TOL):
    """Classify ``rho`` by its maximal coherence.

    Distillable iff ``eta >= 1 - tol``; incoherent iff ``eta <= tol``; bound
    coherent otherwise. The witnessing pair is attached when distillable.
    """
    rho = as_density(rho)
    value = eta(rho, diag_zero_tol)
    if value >= 1.0 - tol:
        i, j, _ = eta_argmax(rho, diag_zero_tol)
        return Distillability(Verdict.DISTILLABLE, value, (i, j))
    if value <= tol:
        return Distillability(Verdict.INCOHERENT, value)
    return Distillability(Verdict.BOUND, value)
