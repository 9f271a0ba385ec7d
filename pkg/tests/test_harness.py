import json
import math
import statistics
from fractions import Fraction

import numpy as np
import pytest

from oracles import brute_factor
from weylwalk import algebra
from weylwalk.frobenius import GOOD
from weylwalk.harness import (
    TORUS_LIMIT,
    central_trinomial_counts,
    estimate_tau,
    galois_certify,
    nonreg_decay,
    recount,
    survey,
    torus_demo,
    torus_distribution,
    wilson_interval,
)
from weylwalk.walker import ConfigError, GroupSpec, WalkConfig, default_primes, run_walk
from weylwalk.weyl import TypeA, class_from_json, enumerate_classes

SL2, SL3, SP4 = GroupSpec.sl(2), GroupSpec.sl(3), GroupSpec.sp(2)
COMPANION = [[0, 0, 1], [1, 0, 1], [0, 1, 0]]


def test_certify_companion():
    res = galois_certify(COMPANION, SL3, 25, prime_min=2)
    assert res.verdict == "ProvenFullWeyl"
    first = {}
    for o in res.observations:
        if o.good:
            first.setdefault(o.cls, o.prime)
    assert first[TypeA((3,))] == 2
    assert first[TypeA((2, 1))] == 5
    split = next(p for p in algebra.primes_from(2, 30) if p != 23 and len(brute_factor([-1, -1, 0, 1], p)) == 3)
    assert first[TypeA((1, 1, 1))] == split == res.observations[-1].prime
    skipped = [o.prime for o in res.observations if not o.good]
    assert skipped == [23]


def test_certify_identity_degenerate():
    for group in (SL3, SP4):
        eye = np.eye(group.dim, dtype=int)
        assert galois_certify(eye, group, 10).verdict == "Degenerate"
        cfg = WalkConfig.build(group, 0, mode="modular", primes=default_primes(group, 10))
        assert galois_certify(run_walk(cfg, 0), group, 10).verdict == "Degenerate"


def test_certify_single_prime_inconclusive():
    res = galois_certify(COMPANION, SL3, 1, prime_min=2)
    assert res.verdict == "Inconclusive"
    assert res.certificate.observed == {TypeA((3,))}


def test_certify_modular_budget_is_a_config_error():
    cfg = WalkConfig.build(SL3, 20, mode="modular", primes=default_primes(SL3, 10))
    state = run_walk(cfg, 0)
    with pytest.raises(ConfigError):
        galois_certify(state, SL3, 11)
    with pytest.raises(ConfigError):
        galois_certify(state, SL3, 5, prime_min=20)
    with pytest.raises(ConfigError):
        galois_certify(COMPANION, SL3, 0)


def test_certify_exact_and_modular_routes_agree():
    primes = default_primes(SL3, 60)
    cfg = WalkConfig.build(SL3, 30, seed=4, mode="dual", primes=primes)
    for t in range(15):
        st = run_walk(cfg, t)
        a = galois_certify(st.exact, SL3, 60)
        b = galois_certify(st, SL3, 60)
        assert a.verdict == b.verdict
        assert a.observations == b.observations


def test_certificate_soundness_replayable():
    cfg = WalkConfig.build(SP4, 40, seed=6, mode="modular", primes=default_primes(SP4, 200))
    table = enumerate_classes("C", 2)
    for t in range(10):
        res = galois_certify(run_walk(cfg, t), SP4, 200)
        good = {o.cls for o in res.observations if o.status == GOOD}
        if res.verdict == "ProvenFullWeyl":
            assert good == set(table.classes)
        assert good == set(res.certificate.observed)


def test_wilson_interval():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0 and 0.25 < hi < 0.35
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def _survey_cfg(group=SL3, primes=60, seed=2024):
    return WalkConfig.build(group, 0, seed=seed, mode="modular", primes=default_primes(group, primes))


def test_survey_empty_trials():
    res = survey(_survey_cfg(), [10, 20], 0, 60)
    assert res.records == [] and res.jsonl() == ""
    assert [r.trials for r in res.rows] == [0, 0]
    with pytest.raises(ConfigError):
        survey(_survey_cfg(), [], 5, 60)


def test_survey_jsonl_recount_and_schema():
    res = survey(_survey_cfg(), [5, 15, 30], 30, 60)
    counts = recount(res.jsonl())
    for row in res.rows:
        assert counts[row.n] == (row.trials, row.certified)
        assert 0 <= row.certified <= row.trials
    rec = json.loads(res.jsonl().splitlines()[0])
    assert list(rec) == ["trial", "n", "verdict", "observed", "missing", "primes_used", "wall_ms"]
    assert rec["wall_ms"] is None
    for line in res.jsonl().splitlines():
        r = json.loads(line)
        if r["verdict"] == "ProvenFullWeyl":
            assert {class_from_json(c) for c in r["observed"]} == set(enumerate_classes("A", 3).classes)
            assert r["missing"] == []
    header = res.csv().splitlines()[0]
    assert header == "n,trials,certified,fraction,wilson_lo,wilson_hi,mean_primes"


def test_survey_reproducible_and_worker_independent():
    cfg = _survey_cfg(seed=99)
    a = survey(cfg, [8, 16], 12, 60).jsonl()
    b = survey(cfg, [8, 16], 12, 60).jsonl()
    c = survey(cfg, [8, 16], 12, 60, workers=2).jsonl()
    assert a == b == c
    assert survey(_survey_cfg(seed=100), [8, 16], 12, 60).jsonl() != a


def test_survey_timing_flag():
    res = survey(_survey_cfg(), [5], 2, 60, timing=True)
    assert all(isinstance(r["wall_ms"], float) for r in res.records)


def test_survey_decay_rate_forms():
    res = survey(_survey_cfg(), [4, 8, 16], 40, 60)
    kind, c = res.decay_rate()
    assert kind == "=" and c > 1
    full = survey(_survey_cfg(primes=200), [100], 10, 200)
    assert full.rows[0].fraction == 1.0
    kind, c = full.decay_rate()
    assert kind == ">=" and c > 1


def test_tau_basic_and_frozen_median():
    cfg = WalkConfig.build(SL2, 0, seed=2024, mode="modular", primes=default_primes(SL2, 200))
    samples = estimate_tau(cfg, 200, 60, 200)
    assert all(s.censored or s.tau >= 1 for s in samples)
    assert sum(s.censored for s in samples) == 0
    assert statistics.median(s.tau for s in samples) == 3.0


def test_tau_budget_monotone():
    cfg = WalkConfig.build(SL3, 0, seed=8, mode="modular", primes=default_primes(SL3, 120))
    big = estimate_tau(cfg, 40, 40, 120)
    small = estimate_tau(cfg, 40, 40, 30)
    for s, b in zip(small, big):
        if s.censored:
            continue
        assert not b.censored and b.tau <= s.tau


def test_tau_needs_modular():
    cfg = WalkConfig.build(SL2, 0, mode="exact")
    with pytest.raises(ConfigError):
        estimate_tau(cfg, 1, 5, 5)


def test_torus_small_exact():
    rows = torus_demo([1, 2, 3])
    assert rows[0].exact == Fraction(1, 3)
    assert rows[1].exact == Fraction(1, 3)
    assert rows[2].exact == Fraction(7, 27)
    assert torus_distribution(2) == {-2: Fraction(1, 9), -1: Fraction(2, 9), 0: Fraction(1, 3), 1: Fraction(2, 9), 2: Fraction(1, 9)}


def test_torus_recurrence_matches_convolution():
    counts = central_trinomial_counts(300)
    for n in list(range(0, 60)) + [150, 300]:
        assert Fraction(counts[n], 3**n) == torus_distribution(n)[0]


def test_torus_limit():
    row = torus_demo([10_000])[0]
    assert abs(row.scaled / TORUS_LIMIT - 1) < 0.02
    assert TORUS_LIMIT == pytest.approx(math.sqrt(3 / (4 * math.pi)))


def test_torus_montecarlo():
    rows = torus_demo([1, 2, 50], mode="montecarlo", trials=30_000, rng=np.random.default_rng(0))
    exact = torus_demo([1, 2, 50])
    for r, e in zip(rows, exact):
        se = math.sqrt(e.prob * (1 - e.prob) / 30_000)
        assert abs(r.prob - e.prob) < 4 * se
    with pytest.raises(ConfigError):
        torus_demo([0])
    with pytest.raises(ConfigError):
        torus_demo([5], mode="montecarlo")


def test_nonreg_identity_and_frozen_value():
    cfg = WalkConfig.build(SL2, 0, seed=2024, mode="exact")
    rows = nonreg_decay(cfg, [0, 10, 20, 40], 2000)
    assert rows[0].fraction == 1.0
    # calibration run, frozen
    assert rows[-1].nonregular == 158
    fr = [r.fraction for r in rows]
    assert fr[1] > fr[2] > fr[3]


def test_nonreg_modes_agree():
    primes = default_primes(SL2, 12)
    cfg = WalkConfig.build(SL2, 0, seed=3, mode="exact")
    a = nonreg_decay(cfg, [0, 6, 12], 300)
    b = nonreg_decay(cfg.with_mode("modular", primes), [0, 6, 12], 300)
    assert a == b
    with pytest.raises(ConfigError):
        nonreg_decay(cfg.with_mode("modular", primes[:5]), [1], 1)
