"""Censuses of G(F_q): how often each Weyl class occurs as theta(g).

Elements are streamed in chunks, their characteristic polynomials computed
by the batched kernel, and tallied by polynomial.  Each distinct polynomial
is classified once, so the cost is dominated by the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import algebra
from .frobenius import GOOD, classify_poly
from .kernels import charpoly_batch
from .walker import ConfigError, GroupSpec, InvariantError, _unpack, bfs_closure_keys, default_generators
from .weyl import enumerate_classes

SL2_CAP = 512
CHUNK = 1 << 18


def enumerate_sl2(q: int) -> Iterator[np.ndarray]:
    """All of SL(2, F_q), in chunks of (N, 2, 2) int64 arrays."""
    if not algebra.is_probable_prime(q):
        raise ConfigError(f"{q} is not prime")
    if q > SL2_CAP:
        raise ConfigError(f"q = {q} exceeds the SL(2) enumeration cap {SL2_CAP}")
    inv = np.array([0] + [pow(x, -1, q) for x in range(1, q)], dtype=np.int64)
    b, c = np.meshgrid(np.arange(q, dtype=np.int64), np.arange(q, dtype=np.int64), indexing="ij")
    b, c = b.ravel(), c.ravel()
    for a in range(1, q):
        # d = (1 + bc) / a
        d = (1 + b * c) % q * inv[a] % q
        out = np.empty((b.shape[0], 2, 2), dtype=np.int64)
        out[:, 0, 0] = a
        out[:, 0, 1] = b
        out[:, 1, 0] = c
        out[:, 1, 1] = d
        yield out
    # a = 0: bc = -1, d free
    bb, dd = np.meshgrid(np.arange(1, q, dtype=np.int64), np.arange(q, dtype=np.int64), indexing="ij")
    bb, dd = bb.ravel(), dd.ravel()
    out = np.empty((bb.shape[0], 2, 2), dtype=np.int64)
    out[:, 0, 0] = 0
    out[:, 0, 1] = bb
    out[:, 1, 0] = (q - inv[bb]) % q
    out[:, 1, 1] = dd
    yield out


def sample_sl_uniform(m: int, q: int, count: int, rng, chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """i.i.d. uniform elements of SL(m, F_q), in chunks.

    Random matrices are rejected until invertible; the first row is then
    scaled by det^-1.  GL -> SL by this rescaling is exactly (q-1)-to-1.
    """
    if not algebra.is_probable_prime(q):
        raise ConfigError(f"{q} is not prime")
    if q >= 2**31:
        raise ConfigError("sampling modulus must be below 2**31")
    inv = None if q > 1 << 20 else np.array([0] + [pow(x, -1, q) for x in range(1, q)], dtype=np.int64)
    left = count
    while left > 0:
        want = min(chunk, left)
        # oversample to absorb rejections (singular fraction < 1/(q-1) + ...)
        draw = int(want * (1 + 2.0 / (q - 1)) + 16)
        mats = rng.integers(0, q, size=(draw, m, m), dtype=np.int64)
        det = charpoly_batch(mats, q)[:, 0]
        if m % 2:
            det = (q - det) % q
        keep = det != 0
        mats, det = mats[keep][:want], det[keep][:want]
        if inv is not None:
            dinv = inv[det]
        else:
            dinv = np.array([pow(int(x), -1, q) for x in det], dtype=np.int64)
        mats[:, 0, :] = mats[:, 0, :] * dinv[:, None] % q
        left -= mats.shape[0]
        yield mats


def enumerate_by_bfs(group: GroupSpec, q: int, chunk: int = CHUNK) -> Iterator[np.ndarray]:
    """All of G(F_q) by BFS closure of the default generators.

    The closure size must equal the closed-form group order.
    """
    if group.family == "C" and q == 2:
        raise ConfigError("type C censuses need odd q")
    order = group.order_mod(q)
    gens = np.array([g.astype(np.int64) % q for g, _ in default_generators(group)])
    keys = bfs_closure_keys(gens, q, group.dim)
    if keys.shape[0] != order:
        raise InvariantError(f"BFS closure has {keys.shape[0]} elements, expected |{group.name}(F_{q})| = {order}")
    for start in range(0, keys.shape[0], chunk):
        yield _unpack(keys[start : start + chunk], q, group.dim)


@dataclass
class CensusReport:
    group: GroupSpec
    q: int
    population: str  # "enumerate" | "sample" | "bfs"
    total: int
    rs_count: int
    counts: dict  # WeylClass -> int
    targets: dict = field(default_factory=dict)  # WeylClass -> Fraction

    @property
    def rs_fraction(self) -> float:
        return self.rs_count / self.total if self.total else 0.0

    def frequency(self, cls) -> float:
        """|{g regular semisimple : theta(g) = cls}| / |population|."""
        return self.counts.get(cls, 0) / self.total if self.total else 0.0

    def deviation(self, cls) -> float:
        return abs(self.frequency(cls) - float(self.targets[cls]))

    @property
    def deviations(self) -> dict:
        return {c: self.deviation(c) for c in self.targets}

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values())

    def to_json(self) -> dict:
        return {
            "group": self.group.name,
            "q": self.q,
            "population": self.population,
            "total": self.total,
            "rs_count": self.rs_count,
            "rs_fraction": self.rs_fraction,
            # a single coset: SL and Sp are simply connected
            "cosets": 1,
            "classes": [
                {
                    "class": c.to_json(),
                    "count": self.counts.get(c, 0),
                    "target": f"{t.numerator}/{t.denominator}",
                    "target_float": float(t),
                    "frequency": self.frequency(c),
                    "deviation": self.deviation(c),
                }
                for c, t in self.targets.items()
            ],
            "max_deviation": self.max_deviation,
        }


def tally(group: GroupSpec, q: int, chunks, population: str) -> CensusReport:
    d = group.dim
    table = enumerate_classes(group.family, group.rank)
    poly_counts: dict[tuple, int] = {}
    total = 0
    for mats in chunks:
        if mats.shape[1:] != (d, d):
            raise ConfigError("population chunk has the wrong matrix shape")
        total += mats.shape[0]
        polys = charpoly_batch(mats, q)[:, :d]  # drop the leading 1
        uniq, cnt = np.unique(polys, axis=0, return_counts=True)
        for row, c in zip(uniq.tolist(), cnt.tolist()):
            key = tuple(row)
            poly_counts[key] = poly_counts.get(key, 0) + c
    counts = {c: 0 for c in table.classes}
    rs = 0
    for poly, c in poly_counts.items():
        obs = classify_poly(list(poly) + [1], group.family, q)
        if obs.status == GOOD:
            rs += c
            counts[obs.cls] += c
    if sum(counts.values()) != rs:
        raise InvariantError("class counts do not add up to the regular semisimple count")
    return CensusReport(group, q, population, total, rs, counts, dict(table.fractions))


def run_census(group: GroupSpec, q: int, mode: str = "enumerate", samples: int = 0, rng=None) -> CensusReport:
    """Census of G(F_q).

    ``mode`` is "enumerate" (SL(2) only, exhaustive), "bfs" (exhaustive,
    small groups), or "sample" (SL(m) only, ``samples`` uniform draws).
    """
    if mode == "enumerate":
        if group != GroupSpec.sl(2):
            raise ConfigError("direct enumeration is implemented for SL(2) only; use bfs")
        return tally(group, q, enumerate_sl2(q), "enumerate")
    if mode == "bfs":
        return tally(group, q, enumerate_by_bfs(group, q), "bfs")
    if mode == "sample":
        if group.family != "A":
            raise ConfigError("uniform sampling is implemented for SL(m) only")
        if rng is None:
            raise ConfigError("sampling needs an rng")
        return tally(group, q, sample_sl_uniform(group.rank, q, samples, rng), "sample")
    raise ConfigError(f"unknown census mode {mode!r}")
