import itertools

import numpy as np
import pytest

from cohere import sdp
from cohere.errors import ResourceCapError, SolverError
from cohere.linalg import trace_norm


def _vertex_oracle(c, a, b):
    """Minimum of ``c x`` over ``a x = b, x >= 0`` by enumerating basic solutions."""
    m, n = a.shape
    best = np.inf
    for basis in itertools.combinations(range(n), m):
        sub = a[:, basis]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        xb = np.linalg.solve(sub, b)
        if np.all(xb >= -1e-12):
            best = min(best, float(c[list(basis)] @ xb))
    return best


def _lp(c, a, b, sense="min"):
    prog = sdp.ConeProgram(sense)
    blk = prog.add_block(sdp.NONNEG, len(c))
    prog.set_objective(blk, c)
    for row, rhs in zip(a, b):
        prog.add_equality({blk: row}, rhs)
    return prog


def test_fixed_diagonal_trace():
    prog = sdp.ConeProgram("min")
    blk = prog.add_block(sdp.PSD, 2)
    prog.set_objective(blk, np.eye(2))
    for i in range(2):
        e = np.zeros((2, 2))
        e[i, i] = 1
        prog.add_equality({blk: e}, 1.0)
    sol = sdp.solve(prog)
    assert sol.status == "optimal"
    assert sol.primal_value == pytest.approx(2.0, abs=1e-7)


def test_zero_objective():
    prog = sdp.ConeProgram("max")
    blk = prog.add_block(sdp.PSD, 2)
    prog.add_equality({blk: np.eye(2)}, 1.0)
    sol = sdp.solve(prog)
    assert sol.primal_value == pytest.approx(0.0, abs=1e-9)
    assert np.linalg.eigvalsh(sol.primal_point[0])[0] >= -1e-8


@pytest.mark.parametrize("seed", range(8))
def test_lp_matches_vertex_enumeration(seed):
    g = np.random.default_rng(seed)
    m, n = 2 + seed % 2, 5
    a = g.uniform(0.1, 1.0, (m, n))
    b = a @ g.uniform(0.1, 1.0, n)
    c = g.uniform(0.1, 2.0, n)
    sol = sdp.solve(_lp(c, a, b))
    assert sol.primal_value == pytest.approx(_vertex_oracle(c, a, b), abs=1e-7)


def test_trace_norm_epigraph():
    sol = sdp.solve(sdp.trace_norm_program(np.diag([1.0, -1.0])))
    assert sol.primal_value == pytest.approx(2.0, abs=1e-7)
    sol = sdp.solve(sdp.trace_norm_program(np.zeros((2, 2))))
    assert sol.primal_value == pytest.approx(0.0, abs=1e-7)
    g = np.random.default_rng(7)
    for _ in range(3):
        h = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
        h = h + h.conj().T
        sol = sdp.solve(sdp.trace_norm_program(sdp.realify(h)))
        assert sol.primal_value / 2 == pytest.approx(trace_norm(h), abs=1e-7)


def test_weak_duality_and_cone_membership():
    g = np.random.default_rng(3)
    for _ in range(5):
        m = g.standard_normal((3, 3))
        sol = sdp.solve(sdp.trace_norm_program(m))
        # min program: dual is a lower bound
        assert sol.dual_value <= sol.primal_value + 1e-12
        assert np.linalg.eigvalsh(sol.primal_point[0])[0] >= -sdp.FEAS_TOL
        c = g.uniform(0.1, 1.0, 4)
        a = g.uniform(0.1, 1.0, (2, 4))
        lp = sdp.solve(_lp(-c, a, a @ np.ones(4), sense="max"))
        assert lp.dual_value >= lp.primal_value - 1e-12
        assert lp.primal_point[0].min() >= -sdp.FEAS_TOL


def test_objective_scaling():
    g = np.random.default_rng(11)
    a = g.uniform(0.1, 1.0, (2, 5))
    b = a @ np.ones(5)
    c = g.uniform(0.1, 1.0, 5)
    base = sdp.solve(_lp(c, a, b))
    for scale in (0.5, 3.0, 100.0):
        sol = sdp.solve(_lp(scale * c, a, b))
        assert sol.primal_value == pytest.approx(scale * base.primal_value, rel=1e-7)
        assert sol.dual_value == pytest.approx(scale * base.dual_value, rel=1e-7)
        assert np.argmax(sol.primal_point[0]) == np.argmax(base.primal_point[0])


def test_deterministic():
    m = np.random.default_rng(5).standard_normal((4, 4))
    a = sdp.solve(sdp.trace_norm_program(m))
    b = sdp.solve(sdp.trace_norm_program(m))
    assert a.iterations == b.iterations
    assert a.primal_value == b.primal_value and a.dual_value == b.dual_value


def test_redundant_rows_are_dropped():
    prog = _lp(np.ones(3), np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]), [1.0, 2.0])
    sol = sdp.solve(prog)
    assert sol.primal_value == pytest.approx(1.0, abs=1e-8)
    assert len(sol.dropped_rows) == 1


def test_infeasible_is_reported():
    prog = _lp(np.ones(2), np.array([[1.0, 1.0]]), [-1.0])
    with pytest.raises(SolverError) as info:
        sdp.solve(prog)
    assert info.value.solution is not None
    assert info.value.solution.status != "optimal"


def test_psd_cap():
    prog = sdp.ConeProgram()
    prog.add_block(sdp.PSD, 10)
    with pytest.raises(ResourceCapError):
        sdp.solve(prog, psd_cap=8)
