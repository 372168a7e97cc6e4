"""Deterministic seed derivation.

Per-sample seeds are derived from (run seed, index) with splitmix64 so
that dataset generation is order-independent: sample i gets the same
stream no matter which worker renders it or in what order.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step; a stable 64-bit mixing function."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *indices: int) -> int:
    """Hash a base seed with any number of stream indices."""
    h = splitmix64(seed & _MASK)
    for ix in indices:
        h = splitmix64(h ^ splitmix64(ix & _MASK))
    return h


def make_rng(seed: int, *indices: int) -> np.random.Generator:
    """PCG64 generator for the derived stream."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *indices)))
