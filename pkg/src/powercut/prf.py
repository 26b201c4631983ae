"""Seeded 64-bit pseudorandom function and hierarchical seed derivation.

All randomness in the package that has to be replayable across processes
(edge levels, sketch hashing, field elements) flows through `prf`, keyed by
a single master seed.  The mixer is splitmix64: cheap, well distributed,
and easy to evaluate both on Python ints and on numpy uint64 arrays.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int (one 64-bit word in, one out)."""
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def prf(seed: int, *words: int) -> int:
    """Keyed PRF: fold `words` into `seed`, one mix round per word.

    Deterministic across platforms; collisions behave like a random function
    for the desk-scale universes used here.
    """
    h = mix64(seed & MASK64)
    for w in words:
        h = mix64(h ^ mix64(w & MASK64))
    return h


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 on a uint64 array (wraparound arithmetic)."""
    z = (x + np.uint64(_GAMMA)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def prf_array(seeds: np.ndarray, word: int) -> np.ndarray:
    """Vectorized `prf(seed_i, word)` over an array of uint64 seeds."""
    return mix64_array(seeds ^ np.uint64(mix64(word & MASK64)))


def leading_ones(x: int, width: int = 64) -> int:
    """Number of leading 1-bits in the `width`-bit word `x`."""
    count = 0
    for shift in range(width - 1, -1, -1):
        if (x >> shift) & 1:
            count += 1
        else:
            break
    return count
