import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_factor, roots_mod
from weylwalk import algebra
from weylwalk.frobenius import (
    GOOD,
    NOT_SQUAREFREE,
    WRONG_CHAR,
    FrobeniusObservation,
    classify,
    classify_modular,
    theta_type_a,
    theta_type_c,
)
from weylwalk.kernels import walk_mod
from weylwalk.walker import GroupSpec, WalkConfig, default_generators, default_primes, run_walk
from weylwalk.weyl import TypeA, TypeC

COMPANION = [[0, 0, 1], [1, 0, 1], [0, 1, 0]]
SL3 = GroupSpec.sl(3)
SP4 = GroupSpec.sp(2)


def test_theta_a_examples():
    assert roots_mod([-1, -1, 0, 1], 2) == []
    assert theta_type_a([-1, -1, 0, 1], 2) == TypeA((3,))
    assert [len(f) - 1 for f in brute_factor([-1, -1, 0, 1], 5)] == [1, 2]
    assert theta_type_a([-1, -1, 0, 1], 5) == TypeA((2, 1))
    split = algebra._pmul(algebra._pmul([6, 1], [5, 1], 7), [4, 1], 7)  # (T-1)(T-2)(T-3)
    assert theta_type_a(split, 7) == TypeA((1, 1, 1))
    assert theta_type_a([1, -2, 1], 7) == NOT_SQUAREFREE


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=2, max_size=7), st.sampled_from([2, 3, 5, 7, 11]))
def test_theta_a_is_brute_force_degree_pattern(low, p):
    poly = [c % p for c in low] + [1]
    res = theta_type_a(poly, p)
    factors = brute_factor(poly, p)
    if len(set(factors)) != len(factors):
        assert res == NOT_SQUAREFREE
    else:
        assert res == TypeA(tuple(len(f) - 1 for f in factors))
        assert res.rank == len(poly) - 1


def test_theta_c_examples():
    # 5 = disc(T^2 - 3T + 1) is a non-residue mod 7, a residue (4^2) mod 11
    assert pow(5, 3, 7) == 6 and 4 * 4 % 11 == 5
    assert theta_type_c([1, -3, 1], 7) == TypeC((), (1,))
    assert theta_type_c([1, -3, 1], 11) == TypeC((1,), ())
    sq = algebra._pmul(algebra._pmul([-1, 1], [-1, 1], 5), algebra._pmul([1, 1], [1, 1], 5), 5)
    assert theta_type_c(sq, 5) == NOT_SQUAREFREE
    assert theta_type_c([1, -3, 1], 2) == WRONG_CHAR


def _random_palindromic(rng, g, p):
    half = rng.integers(0, p, size=g).tolist()
    return half + rng.integers(0, p, size=1).tolist() + half[::-1]


def _monic_palindrome(rng, g, p):
    c = _random_palindromic(rng, g, p)
    c[0] = c[-1] = 1
    return c


def test_palindromic_squarefree_never_has_unit_roots():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 10_000:
        p = int(rng.choice([3, 5, 7, 11, 13]))
        g = int(rng.integers(1, 4))
        poly = _monic_palindrome(rng, g, p)
        if not algebra.squarefree_mod(poly, p):
            continue
        checked += 1
        assert 1 not in roots_mod(poly, p) and p - 1 not in roots_mod(poly, p)
        res = theta_type_c(poly, p)
        assert isinstance(res, TypeC) and res.rank == g


def test_theta_c_pairing_against_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(400):
        p = int(rng.choice([3, 5, 7]))
        g = int(rng.integers(1, 4))
        poly = _monic_palindrome(rng, g, p)
        if not algebra.squarefree_mod(poly, p):
            continue
        factors = brute_factor(poly, p)
        selfrec = [f for f in factors if tuple(algebra.reciprocal(f, p)) == f]
        others = [f for f in factors if f not in selfrec]
        for f in others:
            assert tuple(algebra.reciprocal(f, p)) in others
        # a pair {f, f*} shares one degree, so every other sorted degree is one cycle
        pos = sorted((len(f) - 1 for f in others), reverse=True)[::2]
        neg = [(len(f) - 1) // 2 for f in selfrec]
        assert theta_type_c(poly, p) == TypeC(tuple(pos), tuple(neg))


def test_classify_examples():
    obs = classify(COMPANION, SL3, 2)
    assert obs == FrobeniusObservation(2, GOOD, TypeA((3,)))
    assert classify(COMPANION, SL3, 23).status == NOT_SQUAREFREE
    for group in (SL3, GroupSpec.sl(2), SP4):
        for p in (3, 5, 7):
            eye = np.eye(group.dim, dtype=int)
            assert classify(eye, group, p).status == NOT_SQUAREFREE
            assert classify_modular(eye, group, p).status == NOT_SQUAREFREE
    assert classify(np.eye(4, dtype=int), SP4, 2).status == WRONG_CHAR
    assert classify_modular(np.eye(4, dtype=int), SP4, 2).status == WRONG_CHAR


def test_non_good_primes_are_exactly_discriminant_divisors():
    disc = algebra.discriminant((-1, -1, 0, 1))
    cfg = WalkConfig.build(SL3, 20, seed=5, mode="exact")
    mats = [np.array(COMPANION, dtype=object)] + [run_walk(cfg, t).exact for t in range(15)]
    for m in mats:
        disc = algebra.discriminant(algebra.charpoly_exact(m))
        if disc == 0:
            continue
        for p in algebra.primes_from(2, 60):
            assert (classify(m, SL3, p).status != GOOD) == (disc % p == 0)


def test_classify_modular_agrees_with_classify():
    pairs = 0
    for group in (SL3, SP4):
        primes = default_primes(group, 25)
        cfg = WalkConfig.build(group, 30, seed=9, mode="dual", primes=primes)
        for t in range(10):
            st_ = run_walk(cfg, t)
            for k, p in enumerate(primes):
                assert classify_modular(st_.modular[k], group, p) == classify(st_.exact, group, p)
                pairs += 1
    assert pairs == 500


def test_classify_conjugation_invariant():
    rng = np.random.default_rng(0)
    for group in (SL3, SP4):
        gens = np.array([g.astype(np.int64) for g, _ in default_generators(group)])
        for p in (5, 7, 11, 13):
            for _ in range(25):
                prim = np.array([p])
                x = walk_mod(gens, rng.integers(0, len(gens), size=15), prim)[0]
                steps = rng.integers(0, len(gens), size=15)
                h = walk_mod(gens, steps, prim)[0]
                # inverse of h: reversed word of inverse generators
                inv_steps = [_inverse_index(gens, s, p) for s in steps[::-1]]
                hinv = walk_mod(gens, np.array(inv_steps), prim)[0]
                assert ((h @ hinv) % p == np.eye(group.dim, dtype=np.int64)).all()
                conj = (hinv @ x % p) @ h % p
                assert classify_modular(conj, group, p) == classify_modular(x, group, p)


def _inverse_index(gens, s, p):
    d = gens.shape[1]
    for j, g in enumerate(gens):
        if ((gens[s] @ g) % p == np.eye(d, dtype=np.int64)).all():
            return j
    raise AssertionError("generator set not symmetric")


def test_observation_json_round_trip():
    for obs in (
        FrobeniusObservation(5, GOOD, TypeA((2, 1))),
        FrobeniusObservation(23, NOT_SQUAREFREE),
        FrobeniusObservation(2, WRONG_CHAR),
        FrobeniusObservation(7, GOOD, TypeC((1,), (1,))),
    ):
        js = obs.to_json()
        assert set(js) == {"p", "status", "class"}
        assert FrobeniusObservation.from_json(js) == obs
    with pytest.raises(ValueError):
        FrobeniusObservation(5, GOOD)
