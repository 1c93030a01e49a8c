import numpy as np
import pytest

from cohere.linalg import DensityMatrix, max_coherent
from cohere.protocols import random_density
from cohere.rng import make_rng


def two_block_state():
    """``Psi_2`` on {0, 1} and on {2, 3}, mixed with equal weight."""
    m = np.zeros((4, 4), dtype=complex)
    m[:2, :2] = max_coherent(2).mat / 2
    m[2:, 2:] = max_coherent(2).mat / 2
    return DensityMatrix(m)


def block_state(sizes, probs, rng):
    """Direct sum of random pure states with the given block sizes and weights."""
    d = sum(sizes)
    m = np.zeros((d, d), dtype=complex)
    start = 0
    for size, p in zip(sizes, probs):
        v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        v /= np.linalg.norm(v)
        m[start:start + size, start:start + size] = p * np.outer(v, v.conj())
        start += size
    return DensityMatrix(m)


def random_unitary(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def two_block():
    return two_block_state()


@pytest.fixture
def random_states(rng):
    return [random_density(d, d, rng) for d in (2, 3, 4) for _ in range(3)]
