"""Property tests over randomly generated states and channels."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cohere.distillation import fidelity_mio_bit, fidelity_sio_bit, multicopy_bounds
from cohere.linalg import (
    dephase,
    fidelity,
    tensor,
    tensor_states,
    trace_norm,
    von_neumann_entropy,
)
from cohere.measures import (
    Verdict,
    coherence_partition,
    eta,
    is_distillable,
    mu_k,
    q_measure,
    rel_entropy_coherence,
    trimmed_state,
)
from cohere.protocols import random_density, random_sio, validate_sio
from cohere.rng import make_rng

from conftest import block_state

seeds = st.integers(0, 2 ** 64 - 1)
dims = st.integers(2, 4)


def _state(seed, d, rank=None):
    g = make_rng(seed)
    rank = d if rank is None else rank
    return random_density(d, rank, g)


@st.composite
def states(draw, max_dim=4):
    d = draw(st.integers(2, max_dim))
    rank = draw(st.integers(1, d))
    return _state(draw(seeds), d, rank)


@st.composite
def block_states(draw):
    sizes = draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    g = make_rng(draw(seeds))
    return block_state(sizes, g.dirichlet(np.ones(len(sizes))), g)


@st.composite
def hermitians(draw):
    d = draw(dims)
    g = make_rng(draw(seeds))
    m = g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))
    return m + m.conj().T


@given(hermitians())
def test_dephase_idempotent(m):
    assert np.max(np.abs(dephase(dephase(m)) - dephase(m))) <= 1e-14


@given(states(), states())
def test_fidelity_symmetric(a, b):
    if a.dim == b.dim:
        assert abs(fidelity(a, b) - fidelity(b, a)) <= 1e-9


@given(hermitians())
def test_trace_norm_dominates_trace(m):
    assert trace_norm(m) >= abs(np.trace(m)) - 1e-12


@given(states())
def test_dephasing_increases_entropy(rho):
    assert von_neumann_entropy(dephase(rho)) >= von_neumann_entropy(rho) - 1e-9


@given(hermitians(), hermitians(), hermitians())
def test_tensor_associative(a, b, c):
    lhs, rhs = tensor(tensor(a, b), c), tensor(a, tensor(b, c))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(1.0, np.max(np.abs(lhs)))


@given(states(max_dim=5))
def test_eta_range(rho):
    assert 0.0 <= eta(rho) <= 1.0


@given(states(), states())
def test_eta_tensorizes(a, b):
    assert abs(eta(tensor_states(a, b)) - max(eta(a), eta(b))) <= 1e-10


@given(seeds, dims, st.integers(1, 4))
def test_eta_monotone_under_sio(seed, d, n_kraus):
    g = make_rng(seed)
    rho = random_density(d, int(g.integers(1, d + 1)), g)
    ch = random_sio(d, n_kraus, g)
    assert eta(ch(rho)) <= eta(rho) + 1e-10


@given(seeds, dims, st.integers(1, 4))
def test_mu_k_monotone_under_sio(seed, d, n_kraus):
    g = make_rng(seed)
    rho = random_density(d, d, g)
    out = random_sio(d, n_kraus, g)(rho)
    for k in range(1, d + 1):
        if min(out.diag()) > 1e-12:
            assert mu_k(out, k) <= mu_k(rho, k) + 1e-9


@given(states(max_dim=5))
def test_mu_family(rho):
    assert abs(mu_k(rho, 2) - math.log2(1 + eta(rho))) <= 1e-10
    values = [mu_k(rho, k) for k in range(1, rho.dim + 1)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


@given(block_states(), block_states())
def test_q_additive(a, b):
    assert abs(q_measure(tensor_states(a, b)) - q_measure(a) - q_measure(b)) <= 1e-8


@given(states(max_dim=3), states(max_dim=3))
def test_q_additive_generic(a, b):
    assert abs(q_measure(tensor_states(a, b)) - q_measure(a) - q_measure(b)) <= 1e-8


@given(block_states(), block_states())
def test_trimmed_state_tensorizes(a, b):
    lhs = trimmed_state(tensor_states(a, b)).mat
    rhs = np.kron(trimmed_state(a).mat, trimmed_state(b).mat)
    assert np.max(np.abs(lhs - rhs)) <= 1e-15


@given(states())
def test_q_sandwich(rho):
    q = q_measure(rho)
    assert 0.0 <= q <= rel_entropy_coherence(rho) + 1e-9


@given(st.one_of(states(), block_states()))
def test_q_positive_iff_distillable(rho):
    distillable = is_distillable(rho).verdict is Verdict.DISTILLABLE
    assert (q_measure(rho) > 1e-9) == distillable


@given(st.one_of(states(), block_states()))
def test_trimmed_diagonal_is_copied(rho):
    assert np.array_equal(np.diag(trimmed_state(rho).mat), np.diag(rho.mat))


@given(st.one_of(states(max_dim=5), block_states()))
def test_partition_blocks_are_rank_one(rho):
    part = coherence_partition(rho)
    for s in part.block_states:
        w = np.linalg.eigvalsh(s.mat)
        assert w[-1] > 0 and (len(w) == 1 or w[-2] <= 1e-7 * w[-1])


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 3))
def test_fidelity_ordering(seed, d):
    rho = _state(seed, d)
    sio = fidelity_sio_bit(rho)
    mio = fidelity_mio_bit(rho)
    assert abs(sio.gap) <= 1e-7
    assert 0.5 - 1e-9 <= sio.value <= mio.value + 1e-7


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(1, 3))
def test_bounds_bracket_exact(seed, n):
    rho = _state(seed, 2)
    b = multicopy_bounds(rho, n)
    assert b.lower - 1e-7 <= b.exact <= b.upper + 1e-7
    assert b.upper - b.exact <= (b.eta / 2) * b.mu ** n + 1e-7


@given(seeds, dims, st.integers(1, 5))
def test_random_sio_is_valid(seed, d, n_kraus):
    ch = random_sio(d, n_kraus, make_rng(seed))
    total = sum(k.conj().T @ k for k in ch.kraus)
    assert np.max(np.abs(total - np.eye(d))) <= 1e-10
    assert validate_sio(ch.kraus).structure == ch.structure
