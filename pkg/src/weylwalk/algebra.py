"""Exact and modular linear/polynomial algebra.

Conventions used throughout the package:

* An integer polynomial is a tuple of Python ints in ascending degree,
  ``(c0, c1, ..., cm)``.  Characteristic polynomials are monic, so the last
  entry is 1.
* A polynomial over F_p is a list (or tuple) of residues in ``[0, p)`` in
  ascending degree with no trailing zeros; the zero polynomial is ``[]``.
* An exact matrix is a square numpy array of ``dtype=object`` holding Python
  ints (so there is never any overflow).  Modular matrices are int64 arrays
  with residues in ``[0, p)`` and the prime carried alongside.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Factorization",
    "as_int_matrix",
    "berkowitz",
    "charpoly_exact",
    "charpoly_mod",
    "discriminant",
    "resultant",
    "squarefree_mod",
    "factor_mod",
    "ddf",
    "degree_pattern",
    "reciprocal",
    "is_probable_prime",
    "next_prime",
    "primes_from",
    "poly_mod",
    "read_matrix",
    "write_matrix",
    "read_poly",
    "write_poly",
]


# ---------------------------------------------------------------------------
# primes

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
_MR_ROUNDS = 64


@lru_cache(maxsize=1 << 16)
def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with 64 rounds.

    The first rounds use the small prime bases, which is a proof of primality
    below 3.3e24; the remaining rounds use bases from a fixed-seed generator,
    so for larger n the error probability is at most 4**-64 = 2**-128.
    """
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    gen = random.Random(n)
    bases = list(_SMALL_PRIMES[:12])
    bases += [gen.randrange(2, n - 1) for _ in range(_MR_ROUNDS - len(bases))]
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_probable_prime(n):
        n += 1
    return n


def primes_from(lower: int, count: int) -> list[int]:
    """The first ``count`` primes >= ``lower``."""
    out = []
    p = lower
    while len(out) < count:
        p = next_prime(p)
        out.append(p)
        p += 1
    return out


def prime_count(x: int) -> int:
    """pi(x), by sieve."""
    if x < 2:
        return 0
    sieve = np.ones(x + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(x**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return int(sieve.sum())


# ---------------------------------------------------------------------------
# exact matrices and characteristic polynomials


def as_int_matrix(rows) -> np.ndarray:
    """Square object-dtype matrix of Python ints."""
    a = np.array([[int(x) for x in row] for row in rows], dtype=object)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
    return a


def berkowitz(rows: Sequence[Sequence]) -> list:
    """Coefficients of det(T*I - A), ascending, by Berkowitz's algorithm.

    Division-free, so it works over any commutative ring: Python ints,
    Fractions, or residues that the caller reduces afterwards.
    """
    a = [list(r) for r in rows]
    n = len(a)
    # vect holds coefficients in descending order, starting from the trailing
    # 1x1 block and growing the principal submatrix upward.
    vect = [1, -a[n - 1][n - 1]]
    for k in range(n - 2, -1, -1):
        m = n - 1 - k  # size of the already-processed block a[k+1:, k+1:]
        row = a[k][k + 1 :]
        col = [a[i][k] for i in range(k + 1, n)]
        # toeplitz column: 1, -a_kk, -R C, -R A C, ..., -R A^{m-1} C
        tcol = [1, -a[k][k]]
        cur = col
        for _ in range(m):
            tcol.append(-sum(r * c for r, c in zip(row, cur)))
            cur = [sum(a[k + 1 + i][k + 1 + j] * cur[j] for j in range(m)) for i in range(m)]
        new = []
        for i in range(m + 2):
            s = 0
            for j in range(min(i, m) + 1):
                s += tcol[i - j] * vect[j]
            new.append(s)
        vect = new
    return vect[::-1]


def charpoly_exact(m) -> tuple[int, ...]:
    """Monic det(T*I - M) over Z, ascending coefficients."""
    rows = [[int(x) for x in r] for r in np.asarray(m, dtype=object).tolist()]
    if any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix is not square")
    return tuple(berkowitz(rows))


def charpoly_mod(m, p: int) -> list[int]:
    """det(T*I - M) over F_p via Hessenberg reduction, ascending coefficients."""
    h = [[int(x) % p for x in r] for r in np.asarray(m, dtype=object).tolist()]
    n = len(h)
    # similarity transform to upper Hessenberg form
    for j in range(n - 2):
        piv = next((i for i in range(j + 1, n) if h[i][j]), None)
        if piv is None:
            continue
        if piv != j + 1:
            h[piv], h[j + 1] = h[j + 1], h[piv]
            for r in h:
                r[piv], r[j + 1] = r[j + 1], r[piv]
        inv = pow(h[j + 1][j], -1, p)
        for i in range(j + 2, n):
            f = h[i][j] * inv % p
            if not f:
                continue
            for c in range(n):
                h[i][c] = (h[i][c] - f * h[j + 1][c]) % p
            for r in h:
                r[j + 1] = (r[j + 1] + f * r[i]) % p
    # polys[k] = charpoly of leading k x k block (ascending lists)
    polys = [[1]]
    for k in range(1, n + 1):
        cur = _pmul([(-h[k - 1][k - 1]) % p, 1], polys[k - 1], p)
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = prod * h[i][i - 1] % p
            if not prod:
                break
            coef = prod * h[i - 1][k - 1] % p
            cur = _psub(cur, _pscale(polys[i - 1], coef, p), p)
        polys.append(cur)
    out = polys[n] + [0] * (n + 1 - len(polys[n]))
    return out


def poly_mod(poly: Iterable[int], p: int) -> list[int]:
    """Reduce an integer polynomial mod p (trailing zeros stripped)."""
    return _trim([int(c) % p for c in poly])


# ---------------------------------------------------------------------------
# resultants and discriminants


def _bareiss_det(rows: list[list[int]]) -> int:
    a = [list(r) for r in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f: Sequence[int], g: Sequence[int]) -> int:
    """Res(f, g) as the Sylvester determinant (coefficients ascending)."""
    m, n = len(f) - 1, len(g) - 1
    if m < 0 or n < 0:
        return 0
    if m == 0 and n == 0:
        return 1
    size = m + n
    fd, gd = list(f)[::-1], list(g)[::-1]
    rows = []
    for i in range(n):
        rows.append([0] * i + fd + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gd + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(poly: Sequence[int]) -> int:
    """Discriminant of a monic integer polynomial of degree >= 1."""
    poly = tuple(int(c) for c in poly)
    m = len(poly) - 1
    if m < 1 or poly[-1] != 1:
        raise ValueError("discriminant expects a monic polynomial of degree >= 1")
    if m == 1:
        return 1
    deriv = [i * poly[i] for i in range(1, m + 1)]
    sign = -1 if (m * (m - 1) // 2) % 2 else 1
    return sign * resultant(poly, deriv)


# ---------------------------------------------------------------------------
# arithmetic in F_p[T]


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _padd(a, b, p):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % p
    return _trim(out)


def _psub(a, b, p):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _trim(out)


def _pscale(a, c, p):
    return _trim([x * c % p for x in a])


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([c % p for c in out])


def _pdivmod(a, b, p):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    if len(a) - 1 < db:
        return [], _trim(a)
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv % p
        if c:
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return _trim(q), _trim(a[:db])


def _pmod(a, b, p):
    return _pdivmod(a, b, p)[1]


def _monic(a, p):
    if not a:
        return []
    return _pscale(a, pow(a[-1], -1, p), p)


def _pgcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return _monic(a, p)


def _pderiv(a, p):
    return _trim([i * a[i] % p for i in range(1, len(a))])


def _ppowmod(base, e, mod, p):
    result = [1]
    base = _pmod(base, mod, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), mod, p)
        e >>= 1
        if e:
            base = _pmod(_pmul(base, base, p), mod, p)
    return result


def _check_prime(p: int) -> None:
    if not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")


def squarefree_mod(poly: Sequence[int], p: int) -> bool:
    """True iff gcd(P, P') = 1 over F_p."""
    f = poly_mod(poly, p)
    if len(f) <= 1:
        return True
    return len(_pgcd(f, _pderiv(f, p), p)) == 1


def reciprocal(poly: Sequence[int], p: int) -> list[int]:
    """Monic normalization of T^deg * P(1/T) over F_p."""
    f = poly_mod(poly, p)
    if not f or f[0] == 0:
        raise ValueError("reciprocal needs a nonzero constant term")
    return _monic(f[::-1], p)


def ddf(poly: Sequence[int], p: int) -> list[tuple[list[int], int]]:
    """Distinct-degree factorization of a monic squarefree polynomial.

    Returns ``(g, d)`` pairs where g is the product of all irreducible factors
    of degree d; only nontrivial stages are listed.
    """
    f = _monic(poly_mod(poly, p), p)
    out = []
    x = [0, 1]
    h = x
    d = 0
    while len(f) - 1 >= 2 * (d + 1):
        d += 1
        h = _ppowmod(h, p, f, p)
        g = _pgcd(f, _psub(h, x, p), p)
        if len(g) > 1:
            out.append((g, d))
            f = _pdivmod(f, g, p)[0]
            h = _pmod(h, f, p)
    if len(f) > 1:
        out.append((f, len(f) - 1))
    return out


def degree_pattern(poly: Sequence[int], p: int) -> list[int] | None:
    """Irreducible-factor degrees of P over F_p, or None if not squarefree."""
    if not squarefree_mod(poly, p):
        return None
    parts = []
    for g, d in ddf(poly, p):
        parts.extend([d] * ((len(g) - 1) // d))
    return sorted(parts, reverse=True)


def _rand_poly(rng, p, deg):
    return _trim([int(rng.integers(0, p)) if p < 2**62 else _rand_below(rng, p) for _ in range(deg)])


def _rand_below(rng, n):
    nbytes = (n.bit_length() + 7) // 8 + 8
    return int.from_bytes(rng.bytes(nbytes), "little") % n


def _edf(g, d, p, rng) -> list[list[int]]:
    """Cantor-Zassenhaus equal-degree splitting (trace variant for p = 2)."""
    n = len(g) - 1
    if n == d:
        return [g]
    while True:
        a = _rand_poly(rng, p, n)
        if len(a) < 2:
            continue
        if p == 2:
            t = a
            acc = list(a)
            for _ in range(d - 1):
                t = _pmod(_pmul(t, t, p), g, p)
                acc = _padd(acc, t, p)
            b = acc
        else:
            b = _psub(_ppowmod(a, (p**d - 1) // 2, g, p), [1], p)
        h = _pgcd(g, b, p)
        if 1 < len(h) < len(g):
            rest = _pdivmod(g, h, p)[0]
            return _edf(h, d, p, rng) + _edf(rest, d, p, rng)


def _squarefree_decomposition(f, p) -> list[tuple[list[int], int]]:
    """Yun-style decomposition over F_p: monic f = prod a_i^i."""
    out: list[tuple[list[int], int]] = []
    if len(f) <= 1:
        return out
    df = _pderiv(f, p)
    if not df:
        # f is a p-th power: take the p-th root coefficientwise
        root = [f[i] for i in range(0, len(f), p)]
        return [(g, m * p) for g, m in _squarefree_decomposition(root, p)]
    c = _pgcd(f, df, p)
    w = _pdivmod(f, c, p)[0]
    i = 1
    while len(w) > 1:
        y = _pgcd(w, c, p)
        z = _pdivmod(w, y, p)[0]
        if len(z) > 1:
            out.append((z, i))
        i += 1
        w = y
        c = _pdivmod(c, y, p)[0]
    if len(c) > 1:
        root = [c[i] for i in range(0, len(c), p)]
        out.extend((g, m * p) for g, m in _squarefree_decomposition(root, p))
    return out


def is_irreducible_mod(poly: Sequence[int], p: int) -> bool:
    f = _monic(poly_mod(poly, p), p)
    if len(f) <= 1:
        return False
    if not squarefree_mod(f, p):
        return False
    stages = ddf(f, p)
    return len(stages) == 1 and stages[0][1] == len(f) - 1


@dataclass(frozen=True)
class Factorization:
    """Irreducible factorization over F_p: monic factors with multiplicities."""

    p: int
    factors: tuple[tuple[tuple[int, ...], int], ...]

    def product(self) -> list[int]:
        out = [1]
        for f, m in self.factors:
            for _ in range(m):
                out = _pmul(out, list(f), self.p)
        return out

    def degrees(self) -> list[int]:
        return sorted((len(f) - 1 for f, m in self.factors for _ in range(m)), reverse=True)


def factor_mod(poly: Sequence[int], p: int, rng) -> Factorization:
    """Complete factorization of a monic polynomial over F_p.

    Squarefree split, distinct-degree split, then Cantor-Zassenhaus.  The
    result is re-multiplied and every factor re-checked for irreducibility
    before returning.
    """
    _check_prime(p)
    f = poly_mod(poly, p)
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    if f[-1] != 1:
        raise ValueError("factor_mod expects a monic polynomial")
    pairs: dict[tuple[int, ...], int] = {}
    for part, mult in _squarefree_decomposition(f, p):
        for g, d in ddf(part, p):
            for irr in _edf(g, d, p, rng):
                key = tuple(irr)
                pairs[key] = pairs.get(key, 0) + mult
    fac = Factorization(p, tuple(sorted(pairs.items(), key=lambda kv: (len(kv[0]), kv[0]))))
    if fac.product() != f:
        raise AssertionError("factorization does not multiply back to its input")
    for g, _ in fac.factors:
        if not is_irreducible_mod(g, p):
            raise AssertionError(f"factor {g} is not irreducible mod {p}")
    return fac


# ---------------------------------------------------------------------------
# text formats


def read_matrix(text: str) -> np.ndarray:
    """Parse ``d`` followed by ``d`` rows of ``d`` integers."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 1:
        raise ValueError("matrix text must start with the dimension on its own line")
    d = int(lines[0][0])
    rows = lines[1:]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValueError(f"expected {d} rows of {d} integers")
    return as_int_matrix(rows)


def write_matrix(m) -> str:
    m = np.asarray(m, dtype=object)
    lines = [str(m.shape[0])] + [" ".join(str(int(x)) for x in row) for row in m.tolist()]
    return "\n".join(lines) + "\n"


def read_poly(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split())


def write_poly(poly: Iterable[int]) -> str:
    return " ".join(str(int(c)) for c in poly) + "\n"


def exact_inverse(m) -> np.ndarray:
    """Inverse over Z of a unimodular matrix (raises if not unimodular)."""
    rows = [[Fraction(int(x)) for x in r] for r in np.asarray(m, dtype=object).tolist()]
    n = len(rows)
    aug = [r + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    out = [r[n:] for r in aug]
    if any(x.denominator != 1 for r in out for x in r):
        raise ValueError("matrix is not invertible over Z")
    return as_int_matrix([[int(x) for x in r] for r in out])
