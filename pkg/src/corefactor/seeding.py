"""Seed handling.

All randomness goes through :class:`numpy.random.PCG64` generators.  Child
seeds for independent trials are derived with SplitMix64 mixing so that a
trial's stream depends only on ``(base_seed, *indices)`` and never on the
order in which trials are scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(base_seed: int, *indices: int) -> int:
    """Mix ``base_seed`` with a tuple of indices into a new 64-bit seed."""
    h = splitmix64(base_seed & _MASK)
    for i in indices:
        h = splitmix64(h ^ (i & _MASK))
    return h


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK))
