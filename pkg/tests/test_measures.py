import math

import numpy as np
import pytest

from cohere.errors import CliqueViolationError, NoAdmissiblePairError, RankViolationError
from cohere.linalg import DensityMatrix, dephase, isotropic_qubit, max_coherent, tensor_states
from cohere.measures import (
    Verdict,
    a_matrix,
    coherence_partition,
    eta,
    eta_argmax,
    is_distillable,
    mu_k,
    q_decomposition,
    q_measure,
    rel_entropy_coherence,
    trimmed_state,
)
from cohere.protocols import random_density

from conftest import block_state


def test_a_matrix_oracles(rng):
    assert np.allclose(a_matrix(max_coherent(3)), np.ones((3, 3)))
    assert np.allclose(a_matrix(np.diag([0.2, 0.3, 0.5])), np.eye(3))
    rho = random_density(3, 3, rng)
    a = a_matrix(rho)
    m = rho.mat
    for i in range(3):
        for j in range(3):
            assert abs(a[i, j]) == pytest.approx(abs(m[i, j]) / math.sqrt(m[i, i].real * m[j, j].real))


def test_a_matrix_zero_diagonal():
    rho = np.diag([0.5, 0.5, 0.0])
    a = a_matrix(rho)
    assert np.array_equal(a, np.diag([1, 1, 0]))


def test_eta_oracles(rng):
    assert eta(isotropic_qubit(0.5)) == 0.5
    assert eta(np.diag([0.1, 0.2, 0.7])) == 0.0
    assert eta(max_coherent(3)) == pytest.approx(1.0, abs=1e-12)
    rho = random_density(5, 5, rng)
    a = np.abs(a_matrix(rho))
    np.fill_diagonal(a, 0)
    assert eta(rho) == pytest.approx(a.max(), abs=1e-14)


def test_eta_argmax():
    assert eta_argmax(isotropic_qubit(0.4))[:2] == (0, 1)
    assert eta_argmax(max_coherent(3))[:2] == (0, 1)
    m = np.zeros((4, 4), dtype=complex)
    m[2:, 2:] = max_coherent(2).mat * 0.6
    m[0, 0], m[1, 1] = 0.3, 0.1
    i, j, e = eta_argmax(m)
    assert (i, j) == (2, 3) and e == pytest.approx(1.0)
    with pytest.raises(NoAdmissiblePairError):
        eta_argmax(np.diag([1.0, 0.0]))


def test_eta_argmax_prefers_heavier_pair():
    # two pure blocks, both with eta 1; the heavier one must win
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = np.full((2, 2), 0.1)
    m[2:, 2:] = np.full((2, 2), 0.4)
    assert eta_argmax(m)[:2] == (2, 3)


def test_mu_k_oracles(rng):
    rho = random_density(4, 4, rng)
    assert mu_k(rho, 1) == pytest.approx(0.0, abs=1e-15)
    for _ in range(5):
        rho = random_density(4, 4, rng)
        assert mu_k(rho, 2) == pytest.approx(math.log2(1 + eta(rho)), abs=1e-10)
    for d in (2, 3, 5):
        assert mu_k(max_coherent(d), d) == pytest.approx(math.log2(d), abs=1e-12)
    with pytest.raises(ValueError):
        mu_k(rho, 5)


def test_partition_oracles(rng, two_block):
    part = coherence_partition(max_coherent(3))
    assert part.blocks == ((0, 1, 2),) and part.block_probs == pytest.approx((1.0,))
    assert np.linalg.matrix_rank(part.block_states[0].mat, tol=1e-10) == 1
    part = coherence_partition(random_density(4, 4, rng), edge_tol=1e-7)
    assert part.is_trivial() and part.sizes == (1, 1, 1, 1)
    part = coherence_partition(two_block)
    assert part.blocks == ((0, 1), (2, 3))
    assert part.block_probs == pytest.approx((0.5, 0.5))
    assert part.edges == {(0, 1), (2, 3)}


def test_partition_errors():
    # path graph 0-1-2 at a loose tolerance
    angles = np.array([0.0, 0.3, 0.6])
    v = np.stack([np.cos(angles), np.sin(angles)])
    rho = v.T @ v / 3
    with pytest.raises(CliqueViolationError):
        coherence_partition(rho, edge_tol=0.1)
    # a loose tolerance admits a mixed block
    with pytest.raises(RankViolationError):
        coherence_partition(isotropic_qubit(0.95), edge_tol=0.1)


def test_trimmed_state_oracles(rng, two_block):
    rho = random_density(3, 3, rng)
    assert np.array_equal(trimmed_state(rho).mat, dephase(rho))
    pure = random_density(3, 1, rng)
    assert np.array_equal(trimmed_state(pure).mat, pure.mat)
    assert np.array_equal(trimmed_state(two_block).mat, two_block.mat)


def test_trimmed_keeps_diagonal(rng):
    rho = block_state([2, 1, 3], [0.2, 0.3, 0.5], rng)
    assert np.array_equal(np.diag(trimmed_state(rho).mat), np.diag(rho.mat))


def test_q_oracles(two_block):
    for m in range(2, 7):
        assert q_measure(max_coherent(m)) == pytest.approx(math.log2(m), abs=1e-12)
    assert q_measure(isotropic_qubit(0.8)) == 0.0
    assert q_measure(two_block) == pytest.approx(1.0, abs=1e-10)


def test_q_routes_agree(rng):
    for sizes in ([2, 2], [1, 3], [2, 1, 2]):
        probs = rng.dirichlet(np.ones(len(sizes)))
        dec = q_decomposition(block_state(sizes, probs, rng))
        assert dec.value == pytest.approx(dec.shannon_value, abs=1e-9)


def test_rel_entropy_oracles(rng):
    assert rel_entropy_coherence(max_coherent(4)) == pytest.approx(2.0, abs=1e-9)
    assert rel_entropy_coherence(np.eye(3) / 3) == 0.0
    rho = random_density(4, 4, rng)
    assert rel_entropy_coherence(rho) >= q_measure(rho) - 1e-9


def test_verdicts():
    assert is_distillable(max_coherent(2)).verdict is Verdict.DISTILLABLE
    assert is_distillable(isotropic_qubit(0.99)).verdict is Verdict.BOUND
    assert is_distillable(np.eye(2) / 2).verdict is Verdict.INCOHERENT


def test_trimmed_state_tensorizes(rng):
    a = block_state([2, 1], [0.6, 0.4], rng)
    b = block_state([1, 2], [0.3, 0.7], rng)
    lhs = trimmed_state(tensor_states(a, b)).mat
    rhs = np.kron(trimmed_state(a).mat, trimmed_state(b).mat)
    assert np.allclose(lhs, rhs, atol=1e-15)


def test_eta_lower_semicontinuity(rng):
    # damped sequences sit below eta(rho) and must approach it at the damping rate
    for _ in range(20):
        rho = random_density(3, 2, rng)
        diag = np.diag(np.diag(rho.mat))
        off = rho.mat - diag
        for k in range(1, 40):
            eps = 2.0 ** -k
            assert eta(rho) <= eta(DensityMatrix(diag + (1 - eps) * off)) + eps + 1e-10


def test_eta_lower_semicontinuity_at_boundary():
    # a vanishing diagonal entry is skipped in the limit but not along the way
    rho = np.zeros((3, 3), dtype=complex)
    rho[:2, :2] = max_coherent(2).mat
    for k in range(1, 30):
        eps = 2.0 ** -k
        rho_k = DensityMatrix((1 - eps) * rho + eps * np.eye(3) / 3)
        assert eta(rho) <= eta(rho_k) + eps + 1e-10
