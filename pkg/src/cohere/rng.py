"""Seeded, splittable random streams.

Every stochastic routine takes a :class:`numpy.random.Generator`. Streams
are Philox (counter-based) keyed by a 64-bit seed; batch ``k`` of a
parallel run draws from the stream keyed by ``(seed, k)``.
"""

import os

import numpy as np

SEED_ENV = "COHERE_SEED"
DEFAULT_SEED = 0


def _check(seed):
    if int(seed) != seed or not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(_check(seed))))


def task_rng(seed, index):
    """Independent stream for task ``index`` of a run seeded with ``seed``."""
    entropy = [_check(seed), _check(index)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def seed_from_env(default=DEFAULT_SEED):
    value = os.environ.get(SEED_ENV)
    return _check(int(value)) if value else default
