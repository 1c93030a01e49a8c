"""Fidelity of distilling one coherence bit, multi-copy bounds and rates."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sdp
from .errors import DimensionError, InvalidStateError, ResourceCapError
from .linalg import (
    as_density,
    as_matrix,
    entrywise_abs,
    hermitian_eig,
    tensor_power,
    trace_norm,
)
from .measures import EDGE_TOL, eta, eta_argmax, q_measure

SDP_CAP = 256
EXACT_CAP = 32
CN2_TOL = 1e-9


@dataclass(frozen=True)
class FidelityResult:
    """Optimal fidelity together with the certificates that bracket it.

    ``primal_value`` is evaluated at the maximisation witness ``x`` and
    ``dual_value`` at the minimisation witnesses ``d`` (diagonal) and ``n``
    (entrywise nonnegative); ``value`` is the primal one.
    """

    value: float
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    x: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    n: Optional[np.ndarray] = None


def _pairs(dim):
    return [(i, j) for i in range(dim) for j in range(i + 1, dim)]


def sio_bit_program(rho):
    """Encode the SIO bit-fidelity problem as a cone program.

    The program minimises ``Tr P + Tr M`` over PSD ``P, M`` and nonnegative
    ``N`` with ``(P - M)_ij - N_ij = |rho|_ij`` for ``i < j``; at the optimum
    ``P - M = |rho| + D + N`` and ``Tr P + Tr M`` is its trace norm. The
    multipliers of the equality rows are ``2 X_ij``, where ``X`` is the
    matching maximiser of ``Tr |rho| X``.
    """
    rho = as_density(rho)
    dim = rho.dim
    absr = entrywise_abs(rho)
    pairs = _pairs(dim)
    prog = sdp.ConeProgram("min")
    bp = prog.add_block(sdp.PSD, dim)
    bm = prog.add_block(sdp.PSD, dim)
    bn = prog.add_block(sdp.NONNEG, len(pairs))
    prog.set_objective(bp, np.eye(dim))
    prog.set_objective(bm, np.eye(dim))
    for k, (i, j) in enumerate(pairs):
        e = np.zeros((dim, dim))
        e[i, j] = e[j, i] = 0.5
        sel = np.zeros(len(pairs))
        sel[k] = -1.0
        prog.add_equality({bp: e, bm: -e, bn: sel}, absr[i, j])
    return prog


def _sio_witnesses(rho, sol):
    dim = rho.dim
    pairs = _pairs(dim)
    x = np.zeros((dim, dim))
    n = np.zeros((dim, dim))
    for k, (i, j) in enumerate(pairs):
        x[i, j] = x[j, i] = sol.dual_point[k] / 2
        n[i, j] = n[j, i] = sol.primal_point[2][k]
    h = sol.primal_point[0] - sol.primal_point[1]
    d = np.diag(np.diag(h) - rho.diag())
    return x, d, n


def fidelity_sio_bit(rho, gap_tol=sdp.GAP_TOL, feas_tol=sdp.FEAS_TOL,
                     max_iters=sdp.MAX_ITERS, sdp_cap=SDP_CAP):
    """Best fidelity with ``Psi_2`` reachable from ``rho`` by an SIO channel.

    Solves ``max (Tr |rho| X + 1) / 2`` over symmetric ``X`` with zero
    diagonal, nonnegative entries and ``-I <= X <= I``, together with its
    dual ``min (||  |rho| + D + N ||_1 + 1) / 2``.
    """
    rho = as_density(rho)
    if rho.dim > sdp_cap:
        raise ResourceCapError(f"dimension {rho.dim} exceeds SDP cap {sdp_cap}")
    if rho.dim == 1:
        zero = np.zeros((1, 1))
        return FidelityResult(0.5, 0.5, 0.5, 0.0, 0, zero, zero - rho.diag()[0], zero)
    sol = sdp.solve(sio_bit_program(rho), gap_tol=gap_tol, feas_tol=feas_tol,
                    max_iters=max_iters, psd_cap=sdp_cap)
    x, d, n = _sio_witnesses(rho, sol)
    absr = entrywise_abs(rho)
    primal = 0.5 * (float(np.sum(absr * x)) + 1.0)
    dual = 0.5 * (trace_norm(absr + d + n) + 1.0)
    value = min(max(primal, 0.5), 1.0)
    return FidelityResult(
        value=value,
        primal_value=primal,
        dual_value=dual,
        gap=dual - primal,
        iterations=sol.iterations,
        x=x,
        d=d,
        n=n,
    )


def phase_matrix(rho):
    """Entrywise phases ``rho_ij / |rho_ij|`` (1 where ``rho_ij = 0``)."""
    m = as_density(rho).mat
    mod = np.abs(m)
    out = np.ones_like(m)
    nz = mod > 0
    out[nz] = m[nz] / mod[nz]
    return out


def reconstruct_test_operator(rho, x):
    """``A = (I + X o omega) / 2``, the optimal test operator for ``rho``.

    ``Tr rho A`` reproduces the fidelity attained by ``x``.
    """
    omega = phase_matrix(rho)
    return (np.eye(len(x)) + x * omega) / 2


def cn2_check(a, tol=CN2_TOL):
    """True iff ``2 diag(a) - |a|`` is PSD, i.e. ``a`` has coherence number <= 2."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("expected a square matrix")
    w, _ = hermitian_eig(a)
    if w[0] < -tol:
        raise InvalidStateError(f"matrix is not PSD (min eigenvalue {w[0]:.3g})")
    test = 2 * np.diag(np.diag(a).real) - np.abs(a)
    return bool(np.linalg.eigvalsh(test)[0] >= -tol)


def mio_bit_program(rho):
    """Encode ``min ||rho + D||_1`` over real diagonal ``D``.

    ``rho + D`` enters through its real embedding, whose trace norm is twice
    the complex one; the diagonal shift is left free by pinning only the
    off-diagonal entries and tying the two copies of each diagonal entry.
    """
    rho = as_density(rho)
    dim = rho.dim
    r = sdp.realify(rho.mat)
    frag = sdp.trace_norm_epigraph(2 * dim)
    prog = sdp.ConeProgram("min")
    blk = frag.attach(prog)
    for i in range(2 * dim):
        for j in range(2 * dim):
            if i != j:
                prog.add_equality({blk: frag.entry(i, j)}, r[i, j])
    for k in range(dim):
        prog.add_equality({blk: frag.entry(k, k) - frag.entry(k + dim, k + dim)}, 0.0)
    return prog, frag


def fidelity_mio_bit(rho, gap_tol=sdp.GAP_TOL, feas_tol=sdp.FEAS_TOL,
                     max_iters=sdp.MAX_ITERS, sdp_cap=SDP_CAP):
    """Bit-distillation fidelity under MIO (equal to DIO): ``(min ||rho + D||_1 + 1) / 2``."""
    rho = as_density(rho)
    if 4 * rho.dim > sdp_cap:
        raise ResourceCapError(f"dimension {rho.dim} exceeds SDP cap {sdp_cap} (needs {4 * rho.dim})")
    if rho.dim == 1:
        return FidelityResult(0.5, 0.5, 0.5, 0.0, 0, d=-np.ones((1, 1)))
    prog, frag = mio_bit_program(rho)
    sol = sdp.solve(prog, gap_tol=gap_tol, feas_tol=feas_tol, max_iters=max_iters,
                    psd_cap=sdp_cap)
    w = sol.primal_point[0]
    dim = rho.dim
    dvec = np.array([w[k, 2 * dim + k] for k in range(dim)]) - rho.diag()
    d = np.diag(dvec)
    upper = 0.5 * (trace_norm(rho.mat + d) + 1.0)
    lower = 0.5 * (sol.dual_value / 2 + 1.0)
    value = min(max(upper, 0.5), 1.0)
    return FidelityResult(
        value=value,
        primal_value=upper,
        dual_value=lower,
        gap=upper - lower,
        iterations=sol.iterations,
        d=d,
    )


def fidelity_sio_bit_multicopy(rho, n, sdp_cap=SDP_CAP, **opts):
    """SIO bit-distillation fidelity of ``n`` copies of ``rho``."""
    rho = as_density(rho)
    if n < 1:
        raise ValueError("n must be at least 1")
    if rho.dim ** n > sdp_cap:
        raise ResourceCapError(f"dimension {rho.dim}**{n} = {rho.dim ** n} exceeds SDP cap {sdp_cap}")
    return fidelity_sio_bit(tensor_power(rho, n, cap=sdp_cap), sdp_cap=sdp_cap, **opts).value


def asymptotic_fidelity(rho):
    """Many-copy limit ``(1 + eta) / 2`` of the SIO bit-distillation fidelity."""
    return (1.0 + eta(rho)) / 2


def filter_failure_rate(rho):
    """``1 - 2 min(rho_ii, rho_jj)`` on the maximal-coherence pair.

    The diagonal filter fails on one copy with exactly this probability, so
    ``n`` independent attempts all fail with its ``n``-th power.
    """
    rho = as_density(rho)
    i, j, _ = eta_argmax(rho)
    d = rho.diag()
    return float(min(max(1.0 - 2.0 * min(d[i], d[j]), 0.0), 1.0))


@dataclass(frozen=True)
class MultiCopyBounds:
    n: int
    eta: float
    mu: float
    lower: float
    upper: float
    exact: Optional[float] = None


def multicopy_bounds(rho, n, exact_cap=EXACT_CAP, **opts):
    """Exponentially tight bracket on the ``n``-copy SIO bit fidelity.

    ``lower = (1 + eta)/2 - (eta/2) mu**n`` comes from the diagonal-filter
    protocol, ``upper = (1 + eta)/2`` from monotonicity of ``eta``. The
    exact SDP value is attached when ``dim**n <= exact_cap``.
    """
    rho = as_density(rho)
    if n < 1:
        raise ValueError("n must be at least 1")
    _, _, e = eta_argmax(rho)
    mu = filter_failure_rate(rho)
    upper = (1.0 + e) / 2
    lower = upper - (e / 2) * mu ** n
    exact = None
    if exact_cap and rho.dim ** n <= exact_cap:
        exact = fidelity_sio_bit_multicopy(rho, n, **opts)
    return MultiCopyBounds(n=n, eta=e, mu=mu, lower=lower, upper=upper, exact=exact)


def distillable_coherence(rho, edge_tol=EDGE_TOL):
    """Asymptotic distillable coherence under SIO (= PIO), in bits per copy."""
    return q_measure(rho, edge_tol=edge_tol)
