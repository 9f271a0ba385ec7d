"""Frobenius classes from factorization patterns of characteristic polynomials.

For a prime p at which the characteristic polynomial P of an integer matrix
stays squarefree, the irreducible factorization of P mod p determines the
conjugacy class of Frobenius at p in the Galois group of the splitting field,
viewed inside the Weyl group:

* SL(m): factor degrees give a cycle type in S_m.
* Sp(2g): a self-reciprocal irreducible factor of degree 2d is a negative
  d-cycle; a pair {f, f*} with deg f = d is a positive d-cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import algebra
from .weyl import TypeA, TypeC, WeylClass, class_from_json

GOOD = "good"
NOT_SQUAREFREE = "not_squarefree"
WRONG_CHAR = "wrong_char"


class PairingError(AssertionError):
    """A palindromic squarefree polynomial failed to pair its factors."""


@dataclass(frozen=True)
class FrobeniusObservation:
    prime: int
    status: str
    cls: Optional[WeylClass] = None

    def __post_init__(self):
        if (self.status == GOOD) != (self.cls is not None):
            raise ValueError("a class is present exactly when the status is good")

    @property
    def good(self) -> bool:
        return self.status == GOOD

    def to_json(self) -> dict:
        return {
            "p": self.prime,
            "status": self.status,
            "class": self.cls.to_json() if self.cls is not None else None,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FrobeniusObservation":
        c = obj.get("class")
        return cls(int(obj["p"]), obj["status"], class_from_json(c) if c else None)


def theta_type_a(poly, p: int, rng=None):
    """Cycle type from the factor degrees of P mod p, or NOT_SQUAREFREE.

    Only distinct-degree factorization is needed: a stage of degree d and
    total degree e contributes e/d parts equal to d.
    """
    return _theta_a(tuple(int(c) % p for c in poly), int(p))


@lru_cache(maxsize=1 << 18)
def _theta_a(poly, p):
    parts = algebra.degree_pattern(poly, p)
    if parts is None:
        return NOT_SQUAREFREE
    return TypeA(tuple(parts))


def theta_type_c(poly, p: int, rng=None):
    """Signed cycle type of a palindromic P mod p (p odd), or a status string."""
    if p == 2:
        return WRONG_CHAR
    key = tuple(int(c) % p for c in poly)
    if rng is None:
        return _theta_c_cached(key, int(p))
    return _theta_c(key, int(p), rng)


@lru_cache(maxsize=1 << 18)
def _theta_c_cached(poly, p):
    return _theta_c(poly, p, np.random.default_rng([p, *poly]))


def _theta_c(poly, p, rng):
    f = algebra.poly_mod(poly, p)
    deg = len(f) - 1
    if deg % 2:
        raise ValueError("type C characteristic polynomials have even degree")
    if not algebra.squarefree_mod(f, p):
        return NOT_SQUAREFREE
    # P(1) = 0 or P(-1) = 0 forces a repeated root for palindromic P
    if sum(f) % p == 0 or sum(c if i % 2 == 0 else -c for i, c in enumerate(f)) % p == 0:
        raise PairingError(f"squarefree palindromic polynomial {poly} mod {p} has a root at +-1")
    fac = algebra.factor_mod(f, p, rng)
    pos, neg = [], []
    pending: dict[tuple, int] = {}
    for g, mult in fac.factors:
        if mult != 1:
            raise PairingError("squarefree input produced a repeated factor")
        d = len(g) - 1
        rec = tuple(algebra.reciprocal(g, p))
        if rec == g:
            if d % 2:
                raise PairingError(f"odd-degree self-reciprocal factor {g} mod {p}")
            neg.append(d // 2)
        elif rec in pending:
            del pending[rec]
            pos.append(d)
        else:
            pending[g] = d
    if pending:
        raise PairingError(f"unpaired factors {list(pending)} mod {p}")
    return TypeC(tuple(pos), tuple(neg))


def _observation(res, p) -> FrobeniusObservation:
    if isinstance(res, str):
        return FrobeniusObservation(p, res)
    return FrobeniusObservation(p, GOOD, res)


def classify_poly(poly, family: str, p: int, rng=None) -> FrobeniusObservation:
    """Observation for a characteristic polynomial already reduced mod p."""
    if family == "A":
        return _observation(theta_type_a(poly, p), p)
    return _observation(theta_type_c(poly, p, rng), p)


def classify(m, group, p: int, rng=None) -> FrobeniusObservation:
    """Frobenius observation at p for an integer matrix in ``group``."""
    if group.family == "C" and p == 2:
        return FrobeniusObservation(p, WRONG_CHAR)
    poly = algebra.charpoly_mod(m, p)
    return classify_poly(poly, group.family, p, rng)


def classify_modular(state, group, p: int, rng=None) -> FrobeniusObservation:
    """Same contract as :func:`classify` for a matrix carried mod p only."""
    if group.family == "C" and p == 2:
        return FrobeniusObservation(p, WRONG_CHAR)
    from .kernels import charpoly_batch

    poly = charpoly_batch(np.asarray(state, dtype=np.int64)[None], p)[0]
    return classify_poly(poly.tolist(), group.family, p, rng)
