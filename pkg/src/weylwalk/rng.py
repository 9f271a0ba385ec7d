"""Reproducible per-trial random streams.

Every trial draws from its own generator, seeded by mixing the master seed
with the trial coordinates through the SplitMix64 finalizer::

    z = (seed + (key + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

applied once per key.  Results therefore do not depend on how trials are
scheduled across workers.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1


def mix64(seed: int, key: int) -> int:
    z = (seed + (key + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, *keys: int) -> int:
    z = seed & MASK64
    for k in keys:
        z = mix64(z, int(k))
    return z


def substream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(substream_seed(seed, *keys)))


class StepSampler:
    """Inverse-CDF sampler over exact rational weights using 128-bit draws.

    Index k is returned for a uniform integer u in [0, 2**128) when
    ``u * D < cum[k] * 2**128``, with ``cum`` the integer cumulative weights
    over the common denominator D.
    """

    def __init__(self, weights: Sequence[Fraction]):
        weights = [Fraction(w) for w in weights]
        if not weights or any(w <= 0 for w in weights) or sum(weights) != 1:
            raise ValueError("weights must be positive and sum to 1")
        self.denom = lcm(*(w.denominator for w in weights))
        acc, cum = 0, []
        for w in weights:
            acc += w.numerator * (self.denom // w.denominator)
            cum.append(acc << 128)
        self._cum = cum

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        raw = rng.integers(0, 1 << 64, size=(n, 2), dtype=np.uint64).tolist()
        d = self.denom
        cum = self._cum
        return np.array([bisect_right(cum, ((hi << 64) | lo) * d) for hi, lo in raw], dtype=np.int64)
