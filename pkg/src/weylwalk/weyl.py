"""Conjugacy classes of the Weyl groups S_m (type A) and the hyperoctahedral
group B_g = W(C_g) (type C), with exact class fractions."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Union

__all__ = [
    "TypeA",
    "TypeC",
    "WeylClass",
    "ClassTable",
    "Certificate",
    "partitions",
    "partition_count",
    "class_from_json",
    "enumerate_classes",
    "jordan_certificate",
    "brute_force_group",
]

MAX_RANK = 64


def _canon(parts: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted((int(x) for x in parts), reverse=True))
    if any(x < 1 for x in out):
        raise ValueError(f"partition parts must be positive: {out}")
    return out


@dataclass(frozen=True, order=True)
class TypeA:
    """Cycle type of a permutation in S_m."""

    parts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", _canon(self.parts))

    @property
    def rank(self) -> int:
        return sum(self.parts)

    def to_json(self) -> dict:
        return {"type": "A", "parts": list(self.parts)}

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


@dataclass(frozen=True, order=True)
class TypeC:
    """Signed cycle type: positive cycles ``pos``, negative cycles ``neg``."""

    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pos", _canon(self.pos))
        object.__setattr__(self, "neg", _canon(self.neg))

    @property
    def rank(self) -> int:
        return sum(self.pos) + sum(self.neg)

    def to_json(self) -> dict:
        return {"type": "C", "pos": list(self.pos), "neg": list(self.neg)}

    def __str__(self):
        return f"[+{list(self.pos)} -{list(self.neg)}]"


WeylClass = Union[TypeA, TypeC]


def class_from_json(obj: dict) -> WeylClass:
    if obj.get("type") == "A":
        return TypeA(tuple(obj["parts"]))
    if obj.get("type") == "C":
        return TypeC(tuple(obj["pos"]), tuple(obj["neg"]))
    raise ValueError(f"unknown Weyl class encoding: {obj!r}")


@lru_cache(maxsize=None)
def partitions(n: int, max_part: int | None = None) -> tuple[tuple[int, ...], ...]:
    """All partitions of n (weakly decreasing), largest first."""
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    """p(n) by Euler's pentagonal recurrence (independent of ``partitions``)."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        k += 1
    return total


def _centralizer_a(parts) -> int:
    z = 1
    for j, a in Counter(parts).items():
        z *= j**a * factorial(a)
    return z


def _centralizer_c(pos, neg) -> int:
    z = 1
    for parts in (pos, neg):
        for j, a in Counter(parts).items():
            z *= (2 * j) ** a * factorial(a)
    return z


@dataclass(frozen=True)
class ClassTable:
    family: str  # "A" or "C"
    rank: int  # m for type A (S_m), g for type C
    classes: tuple
    fractions: dict = field(hash=False, compare=False)

    @property
    def order(self) -> int:
        if self.family == "A":
            return factorial(self.rank)
        return 2**self.rank * factorial(self.rank)

    def fraction(self, cls: WeylClass) -> Fraction:
        return self.fractions[cls]

    def __contains__(self, cls) -> bool:
        return cls in self.fractions

    def __len__(self) -> int:
        return len(self.classes)


def enumerate_classes(family: str, rank: int) -> ClassTable:
    """Class table of S_rank (family "A") or B_rank (family "C")."""
    return _enumerate_classes(family.upper(), int(rank))


@lru_cache(maxsize=None)
def _enumerate_classes(family: str, rank: int) -> ClassTable:
    if family == "A":
        if not 2 <= rank <= MAX_RANK:
            raise ValueError(f"type A needs 2 <= m <= {MAX_RANK}, got {rank}")
        classes = tuple(TypeA(pt) for pt in partitions(rank))
        fr = {c: Fraction(1, _centralizer_a(c.parts)) for c in classes}
    elif family == "C":
        if not 1 <= rank <= MAX_RANK:
            raise ValueError(f"type C needs 1 <= g <= {MAX_RANK}, got {rank}")
        classes = tuple(
            TypeC(pos, neg)
            for k in range(rank, -1, -1)
            for pos in partitions(k)
            for neg in partitions(rank - k)
        )
        fr = {c: Fraction(1, _centralizer_c(c.pos, c.neg)) for c in classes}
    else:
        raise ValueError(f"unknown family {family!r}; expected 'A' or 'C'")
    return ClassTable(family, rank, classes, fr)


@dataclass(frozen=True)
class Certificate:
    verdict: str  # "ProvenFullWeyl" | "Inconclusive" | "Degenerate"
    observed: frozenset
    missing: tuple

    @property
    def proven(self) -> bool:
        return self.verdict == "ProvenFullWeyl"


PROVEN = "ProvenFullWeyl"
INCONCLUSIVE = "Inconclusive"
DEGENERATE = "Degenerate"


def jordan_certificate(table: ClassTable, observed: Iterable[WeylClass]) -> Certificate:
    """Full-Weyl certificate: a subgroup meeting every class is the whole group.

    Only meaningful once the Galois group is known to embed in W, which holds
    for characteristic polynomials of SL/Sp elements.
    """
    seen = frozenset(observed)
    stray = [c for c in seen if c not in table]
    if stray:
        raise ValueError(f"observed classes not in the table: {stray}")
    missing = tuple(c for c in table.classes if c not in seen)
    return Certificate(INCONCLUSIVE if missing else PROVEN, seen, missing)


# ---------------------------------------------------------------------------
# brute-force oracle


def _cycle_type(perm) -> tuple[int, ...]:
    n = len(perm)
    seen = [False] * n
    out = []
    for i in range(n):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            out.append(length)
    return tuple(out)


def _signed_cycle_type(perm, signs) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = len(perm)
    seen = [False] * n
    pos, neg = [], []
    for i in range(n):
        if not seen[i]:
            j, length, flips = i, 0, 0
            while not seen[j]:
                seen[j] = True
                flips ^= signs[j]
                j = perm[j]
                length += 1
            (neg if flips else pos).append(length)
    return tuple(pos), tuple(neg)


def brute_force_group(family: str, rank: int) -> list[tuple[tuple, WeylClass]]:
    """Every element of S_m or B_g with its class label.

    Elements are ``(perm,)`` or ``(perm, signs)`` tuples.  Limited to m <= 8
    and g <= 5.
    """
    family = family.upper()
    if family == "A":
        if not 1 <= rank <= 8:
            raise ValueError("brute force limited to m <= 8")
        return [((perm,), TypeA(_cycle_type(perm))) for perm in itertools.permutations(range(rank))]
    if family == "C":
        if not 1 <= rank <= 5:
            raise ValueError("brute force limited to g <= 5")
        out = []
        for perm in itertools.permutations(range(rank)):
            for signs in itertools.product((0, 1), repeat=rank):
                out.append(((perm, signs), TypeC(*_signed_cycle_type(perm, signs))))
        return out
    raise ValueError(f"unknown family {family!r}")
