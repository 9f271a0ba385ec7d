import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from oracles import brute_factor, cofactor_charpoly, roots_mod
from weylwalk import algebra
from weylwalk.algebra import (
    charpoly_exact,
    charpoly_mod,
    discriminant,
    factor_mod,
    reciprocal,
    squarefree_mod,
)
from weylwalk.walker import GroupSpec, WalkConfig, default_primes, run_walk

COMPANION = [[0, 0, 1], [1, 0, 1], [0, 1, 0]]  # T^3 - T - 1
# 12-step SL(3) walk, seed 7, trial 0
WALK12 = [[0, -1, -2], [0, 0, -1], [1, 2, 0]]


def test_charpoly_identity():
    assert charpoly_exact(np.eye(3, dtype=int)) == (-1, 3, -3, 1)


def test_charpoly_companion():
    assert charpoly_exact(COMPANION) == (-1, -1, 0, 1)


def test_charpoly_recorded_walk_matches_cofactor_expansion():
    cfg = WalkConfig.build(GroupSpec.sl(3), 12, seed=7, mode="exact")
    assert run_walk(cfg, 0).exact.tolist() == WALK12
    assert charpoly_exact(WALK12) == cofactor_charpoly(WALK12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-50, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_berkowitz_matches_cofactor(m):
    assert charpoly_exact(m) == cofactor_charpoly(m)


def test_charpoly_big_entries_exact():
    m = [[10**30 + 1, 7], [3, -(10**25)]]
    c = charpoly_exact(m)
    assert c == (m[0][0] * m[1][1] - 21, -(m[0][0] + m[1][1]), 1)


def test_charpoly_mod_examples():
    assert charpoly_mod(np.eye(2, dtype=int), 5) == [1, 3, 1]
    assert charpoly_mod([[0, -1], [1, 0]], 7) == [1, 0, 1]


def test_charpoly_mod_cross_check_walks():
    # 100 walk matrices x 20 primes
    group = GroupSpec.sl(3)
    primes = default_primes(group, 20)
    cfg = WalkConfig.build(group, 25, seed=11, mode="exact")
    for t in range(100):
        m = run_walk(cfg, t).exact
        c = charpoly_exact(m)
        for p in primes:
            assert charpoly_mod(m, p) == [x % p for x in c]


def test_charpoly_mod_randomized_2000():
    rng = np.random.default_rng(3)
    primes = [2, 3, 5, 7, 11, 13, 101, 65537, 2**31 - 1]
    for _ in range(2000):
        n = int(rng.integers(1, 7))
        m = rng.integers(-(10**6), 10**6, size=(n, n)).tolist()
        p = int(rng.choice(primes))
        assert charpoly_mod(m, p) == [x % p for x in charpoly_exact(m)]


def test_discriminant_examples():
    assert discriminant((-1, 0, 1)) == 4
    assert discriminant((1, -2, 1)) == 0
    assert discriminant((-1, -1, 0, 1)) == -23


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=7))
def test_discriminant_matches_sympy(low):
    poly = tuple(low) + (1,)
    t = sympy.symbols("t")
    expr = sum(c * t**i for i, c in enumerate(poly))
    expected = 1 if len(poly) == 2 else int(sympy.discriminant(expr, t))
    assert discriminant(poly) == expected


def test_discriminant_rejects_non_monic():
    with pytest.raises(ValueError):
        discriminant((1, 2))


def test_squarefree_examples():
    assert squarefree_mod([1, 0, 1], 5)
    assert not squarefree_mod([1, -2, 1], 5)
    assert not squarefree_mod([-1, -1, 0, 1], 23)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-30, 30), min_size=1, max_size=6), st.sampled_from([2, 3, 5, 7, 11, 13, 23]))
def test_disc_vanishes_mod_p_iff_not_squarefree(low, p):
    poly = tuple(low) + (1,)
    if len(poly) < 2:
        return
    assert (discriminant(poly) % p == 0) == (not squarefree_mod(poly, p))


def _factors(fac):
    out = []
    for f, m in fac.factors:
        out.extend([f] * m)
    return sorted(out, key=lambda g: (len(g), g))


def test_factor_examples():
    rng = np.random.default_rng(0)
    assert roots_mod([1, 0, 1], 5) == [2, 3]
    assert _factors(factor_mod([1, 0, 1], 5, rng)) == [(2, 1), (3, 1)]
    assert roots_mod([1, 0, 1], 3) == []
    assert _factors(factor_mod([1, 0, 1], 3, rng)) == [(1, 0, 1)]
    fac = factor_mod([-1, -1, 0, 1], 5, rng)
    assert _factors(fac) == brute_factor([-1, -1, 0, 1], 5) == [(3, 1), (3, 2, 1)]


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.integers(0, 100), min_size=1, max_size=8),
    st.sampled_from([2, 3, 5, 7]),
    st.integers(0, 2**32),
)
def test_factor_matches_brute_force(low, p, seed):
    poly = [c % p for c in low] + [1]
    fac = factor_mod(poly, p, np.random.default_rng(seed))
    assert fac.product() == algebra.poly_mod(poly, p)
    assert _factors(fac) == brute_factor(poly, p)


def test_factor_deterministic_given_seed():
    poly = [3, 1, 4, 1, 5, 9, 2, 6, 1]
    a = factor_mod(poly, 31, np.random.default_rng(5))
    b = factor_mod(poly, 31, np.random.default_rng(5))
    assert a == b


def test_factor_large_prime():
    p = 2**61 - 1
    poly = algebra._pmul(algebra._pmul([5, 1], [p - 7, 1], p), [1, 0, 1], p)
    fac = factor_mod(poly, p, np.random.default_rng(1))
    assert fac.product() == poly
    assert sorted(len(f) - 1 for f, _ in fac.factors) == [1, 1, 2]  # p = 3 mod 4


def test_reciprocal_examples():
    assert reciprocal([1, -3, 1], 7) == [1, 4, 1]
    assert reciprocal([-2, 1], 7) == [3, 1]  # T - 4


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 100), min_size=1, max_size=8), st.sampled_from([3, 5, 7, 101]))
def test_reciprocal_involution(low, p):
    poly = [c % p for c in low] + [1]
    if poly[0] == 0:
        poly[0] = 1
    assert reciprocal(reciprocal(poly, p), p) == algebra.poly_mod(poly, p)


def test_reciprocal_needs_constant_term():
    with pytest.raises(ValueError):
        reciprocal([0, 1], 5)


def test_symplectic_charpoly_palindromic():
    group = GroupSpec.sp(2)
    cfg = WalkConfig.build(group, 30, seed=3, mode="exact")
    for t in range(20):
        c = charpoly_exact(run_walk(cfg, t).exact)
        assert c == c[::-1]


def test_primality_against_sympy():
    for n in list(range(-3, 3000)) + [2**61 - 1, 2**64 + 1, 10**18 + 9, 561, 1105, 3215031751]:
        assert algebra.is_probable_prime(n) == sympy.isprime(n)


def test_primes_from():
    assert algebra.primes_from(2, 5) == [2, 3, 5, 7, 11]
    assert algebra.primes_from(5, 3) == [5, 7, 11]
    assert algebra.prime_count(10) == 4
    assert algebra.prime_count(1) == 0


def test_text_formats_round_trip():
    m = algebra.as_int_matrix([[1, -2], [3, 10**40]])
    assert algebra.read_matrix(algebra.write_matrix(m)).tolist() == m.tolist()
    assert algebra.read_poly(algebra.write_poly((-1, -1, 0, 1))) == (-1, -1, 0, 1)
    with pytest.raises(ValueError):
        algebra.read_matrix("2\n1 2\n3\n")


def test_exact_inverse():
    m = algebra.as_int_matrix([[2, 1], [1, 1]])
    assert algebra.exact_inverse(m).tolist() == [[1, -1], [-1, 2]]
    with pytest.raises(ValueError):
        algebra.exact_inverse([[2, 0], [0, 1]])
