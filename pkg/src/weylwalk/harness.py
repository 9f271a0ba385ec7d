"""Experiments: Galois certification, surveys over walk length, stopping
times, the torus example, and decay of the non-regular locus."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import algebra
from .frobenius import GOOD, NOT_SQUAREFREE, FrobeniusObservation, classify_poly
from .kernels import charpoly_batch, walk_mod
from .walker import (
    EXACT,
    MODULAR,
    ConfigError,
    GroupSpec,
    WalkConfig,
    WalkState,
    draw_steps,
    run_walk,
    walk_charpoly,
)
from .weyl import DEGENERATE, INCONCLUSIVE, PROVEN, Certificate, enumerate_classes, jordan_certificate

# stream tags keep survey / tau / decay walks independent of each other
_SURVEY, _TAU, _DECAY = 1, 2, 3


@dataclass
class CertifyResult:
    certificate: Certificate
    observations: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return self.certificate.verdict

    @property
    def primes_used(self) -> int:
        return len(self.observations)


def _certify_polys(polys: Iterable[tuple[int, Sequence[int]]], group: GroupSpec, rng=None) -> CertifyResult:
    table = enumerate_classes(group.family, group.rank)
    seen: set = set()
    obs = []
    for p, poly in polys:
        o = classify_poly(poly, group.family, p, rng)
        obs.append(o)
        if o.status == GOOD:
            seen.add(o.cls)
            if len(seen) == len(table):
                break
    cert = jordan_certificate(table, seen)
    if cert.verdict == INCONCLUSIVE and obs and all(o.status == NOT_SQUAREFREE for o in obs):
        cert = Certificate(DEGENERATE, cert.observed, cert.missing)
    return CertifyResult(cert, obs)


def galois_certify(
    target,
    group: GroupSpec,
    prime_budget: int,
    prime_min: int | None = None,
    rng=None,
) -> CertifyResult:
    """Try to prove Gal(splitting field of charpoly) = W by sampling Frobenius.

    ``target`` is an integer matrix (exact route) or a :class:`WalkState`
    carrying modular matrices.  Primes are taken in increasing order from
    ``prime_min``; non-good primes are skipped; the scan stops as soon as
    every class has been seen.
    """
    if prime_budget < 1:
        raise ConfigError("prime budget must be at least 1")
    if prime_min is None:
        prime_min = 5 if group.family == "C" else 2
    if isinstance(target, WalkState) and target.modular is not None:
        carried = [(k, p) for k, p in enumerate(target.primes) if p >= prime_min]
        if len(carried) < prime_budget:
            raise ConfigError(
                f"prime budget {prime_budget} exceeds the {len(carried)} carried primes >= {prime_min}"
            )
        carried = carried[:prime_budget]
        idx = [k for k, _ in carried]
        primes = np.array([p for _, p in carried], dtype=np.int64)
        polys = charpoly_batch(target.modular[idx], primes)
        return _certify_polys(((int(p), row.tolist()) for p, row in zip(primes, polys)), group, rng)
    m = target.exact if isinstance(target, WalkState) else target
    poly = algebra.charpoly_exact(m)
    if algebra.discriminant(poly) == 0:
        table = enumerate_classes(group.family, group.rank)
        return CertifyResult(Certificate(DEGENERATE, frozenset(), tuple(table.classes)), [])
    primes = algebra.primes_from(prime_min, prime_budget)
    return _certify_polys(((p, algebra.poly_mod(poly, p)) for p in primes), group, rng)


# ---------------------------------------------------------------------------
# surveys


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class SurveyRow:
    n: int
    trials: int
    certified: int
    mean_primes: float
    histogram: dict  # class string -> count over all good observations

    @property
    def fraction(self) -> float:
        return self.certified / self.trials if self.trials else 0.0

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.certified, self.trials)


@dataclass
class SurveyResult:
    rows: list
    records: list  # per-trial dicts, in (n, trial) order

    def decay_rate(self) -> tuple[str, Optional[float]]:
        """("=", c) from regressing log(1 - fraction) on n, or (">=", c) from
        Wilson lower bounds when every trial certified."""
        pts = [(r.n, math.log(1 - r.fraction)) for r in self.rows if 0 < r.fraction < 1]
        if len(pts) >= 2:
            x, y = np.array(pts).T
            slope = np.polyfit(x, y, 1)[0]
            return "=", float(math.exp(-slope))
        lows = [(1 - r.wilson[0]) ** (-1.0 / r.n) for r in self.rows if r.trials and r.n > 0 and r.wilson[0] < 1]
        if lows:
            return ">=", float(max(lows))
        return "=", None

    def jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=False) + "\n" for r in self.records)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "trials", "certified", "fraction", "wilson_lo", "wilson_hi", "mean_primes"])
        for r in self.rows:
            lo, hi = r.wilson
            w.writerow([r.n, r.trials, r.certified, repr(r.fraction), repr(lo), repr(hi), repr(r.mean_primes)])
        return buf.getvalue()

    def nondecreasing_up_to_noise(self) -> bool:
        """Every later fraction is above, or has an overlapping Wilson interval
        with, every earlier one."""
        for i, a in enumerate(self.rows):
            for b in self.rows[i + 1 :]:
                if b.fraction < a.fraction and b.wilson[1] < a.wilson[0]:
                    return False
        return True


def _record(trial, n, res: CertifyResult, table, wall_ms):
    order = {c: i for i, c in enumerate(table.classes)}
    observed = sorted(res.certificate.observed, key=order.__getitem__)
    return {
        "trial": trial,
        "n": n,
        "verdict": res.verdict,
        "observed": [c.to_json() for c in observed],
        "missing": [c.to_json() for c in res.certificate.missing],
        "primes_used": res.primes_used,
        "wall_ms": wall_ms,
    }


def _survey_chunk(args):
    config, n, trials, budget, prime_min, timing = args
    cfg = config.with_length(n)
    table = enumerate_classes(cfg.group.family, cfg.group.rank)
    out = []
    for t in trials:
        t0 = time.perf_counter()
        state = run_walk(cfg, t, stream=(_SURVEY, n))
        res = galois_certify(state, cfg.group, budget, prime_min)
        wall = round((time.perf_counter() - t0) * 1000, 3) if timing else None
        rec = _record(t, n, res, table, wall)
        rec["_good"] = [str(o.cls) for o in res.observations if o.status == GOOD]
        out.append(rec)
    return out


def survey(
    config: WalkConfig,
    grid: Sequence[int],
    trials: int,
    prime_budget: int,
    prime_min: int | None = None,
    workers: int = 1,
    timing: bool = False,
) -> SurveyResult:
    """Certified fraction per walk length, with fresh walks for every n.

    Output is bit-identical for a given config seed regardless of
    ``workers``.  ``wall_ms`` is null unless ``timing`` is set, because
    timings are not reproducible.
    """
    if not grid:
        raise ConfigError("survey grid must be nonempty")
    if trials < 0:
        raise ConfigError("trials must be nonnegative")
    chunk = max(1, math.ceil(trials / max(1, 4 * workers)))
    tasks = [
        (config, int(n), list(range(s, min(trials, s + chunk))), prime_budget, prime_min, timing)
        for n in grid
        for s in range(0, trials, chunk)
    ]
    if workers > 1 and tasks:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_survey_chunk, tasks))
    else:
        parts = [_survey_chunk(t) for t in tasks]
    records = [r for part in parts for r in part]
    rows = []
    for n in grid:
        recs = [r for r in records if r["n"] == n]
        hist = Counter(c for r in recs for c in r["_good"])
        rows.append(
            SurveyRow(
                int(n),
                len(recs),
                sum(r["verdict"] == PROVEN for r in recs),
                float(np.mean([r["primes_used"] for r in recs])) if recs else 0.0,
                dict(sorted(hist.items())),
            )
        )
    for r in records:
        del r["_good"]
    return SurveyResult(rows, records)


def recount(jsonl_text: str) -> dict:
    """n -> (trials, certified) recomputed from survey JSONL."""
    out: dict = {}
    for line in jsonl_text.splitlines():
        if line.strip():
            r = json.loads(line)
            t, c = out.get(r["n"], (0, 0))
            out[r["n"]] = (t + 1, c + (r["verdict"] == PROVEN))
    return out


# ---------------------------------------------------------------------------
# stopping time


@dataclass(frozen=True)
class TauSample:
    trial: int
    tau: Optional[int]
    censored: bool

    def to_json(self) -> dict:
        return {"trial": self.trial, "tau": self.tau, "censored": self.censored}


def estimate_tau(
    config: WalkConfig,
    trials: int,
    n_max: int,
    prime_budget: int,
    prime_min: int | None = None,
) -> list[TauSample]:
    """First n <= n_max at which X_n certifies, per trial (modular mode).

    Every prefix X_1 .. X_{n_max} is certified against the same prime list,
    the first ``prime_budget`` carried primes >= ``prime_min``.
    """
    if config.mode == EXACT:
        raise ConfigError("tau estimation scans every prefix and needs modular mode")
    group = config.group
    if prime_min is None:
        prime_min = 5 if group.family == "C" else 2
    carried = [p for p in config.primes if p >= prime_min]
    if len(carried) < prime_budget:
        raise ConfigError(f"prime budget {prime_budget} exceeds the {len(carried)} carried primes")
    primes = np.array(carried[:prime_budget], dtype=np.int64)
    d = group.dim
    out = []
    for t in range(trials):
        steps = draw_steps(config, t, n=n_max, stream=(_TAU,))
        states = walk_mod(config.gens_array, steps, primes, record=True)  # (n+1, K, d, d)
        polys = charpoly_batch(states.reshape(-1, d, d), np.tile(primes, n_max + 1))
        polys = polys.reshape(n_max + 1, len(primes), d + 1)
        tau = None
        for n in range(1, n_max + 1):
            res = _certify_polys(((int(p), polys[n, k].tolist()) for k, p in enumerate(primes)), group)
            if res.verdict == PROVEN:
                tau = n
                break
        out.append(TauSample(t, tau, tau is None))
    return out


# ---------------------------------------------------------------------------
# torus example


def central_trinomial_counts(n_max: int) -> list[int]:
    """#{(m_1..m_n) in {-1,0,1}^n : sum = 0} for n = 0..n_max.

    The convolution DP for these counts satisfies the exact recurrence
    n T_n = (2n - 1) T_{n-1} + 3 (n - 1) T_{n-2}, which is what is run here.
    """
    t = [1, 1]
    for n in range(2, n_max + 1):
        num = (2 * n - 1) * t[-1] + 3 * (n - 1) * t[-2]
        q, r = divmod(num, n)
        if r:
            raise AssertionError("central trinomial recurrence left a remainder")
        t.append(q)
    return t[: n_max + 1]


def torus_distribution(n: int) -> dict[int, Fraction]:
    """Law of S_n = m_1 + ... + m_n, by explicit convolution (exact)."""
    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for k, c in counts.items():
            for step in (-1, 0, 1):
                nxt[k + step] = nxt.get(k + step, 0) + c
        counts = nxt
    total = 3**n
    return {k: Fraction(c, total) for k, c in sorted(counts.items())}


@dataclass(frozen=True)
class TorusRow:
    n: int
    prob: float
    exact: Optional[Fraction]

    @property
    def scaled(self) -> float:
        return math.sqrt(self.n) * self.prob


TORUS_LIMIT = math.sqrt(3 / (4 * math.pi))


def torus_demo(grid: Sequence[int], mode: str = "exact", trials: int = 0, rng=None) -> list[TorusRow]:
    """P(m_1 + ... + m_n = 0) for uniform steps in {-1, 0, 1}."""
    grid = sorted(int(n) for n in grid)
    if not grid or grid[0] < 1:
        raise ConfigError("torus grid needs n >= 1")
    if mode == "exact":
        counts = central_trinomial_counts(grid[-1])
        rows = []
        for n in grid:
            fr = Fraction(counts[n], 3**n)
            rows.append(TorusRow(n, counts[n] / 3**n, fr))
        return rows
    if mode == "montecarlo":
        if trials < 1 or rng is None:
            raise ConfigError("Monte Carlo mode needs trials >= 1 and an rng")
        hits = np.zeros(len(grid), dtype=np.int64)
        want = {n: i for i, n in enumerate(grid)}
        chunk = 10000
        done = 0
        while done < trials:
            m = min(chunk, trials - done)
            s = np.zeros(m, dtype=np.int64)
            for i in range(1, grid[-1] + 1):
                s += rng.integers(-1, 2, size=m)
                if i in want:
                    hits[want[i]] += int((s == 0).sum())
            done += m
        return [TorusRow(n, float(h) / trials, None) for n, h in zip(grid, hits)]
    raise ConfigError(f"unknown torus mode {mode!r}")


# ---------------------------------------------------------------------------
# non-regular locus


@dataclass(frozen=True)
class DecayRow:
    n: int
    trials: int
    nonregular: int

    @property
    def fraction(self) -> float:
        return self.nonregular / self.trials if self.trials else 0.0


def nonreg_decay(config: WalkConfig, grid: Sequence[int], trials: int) -> list[DecayRow]:
    """Fraction of walks whose characteristic polynomial is not squarefree.

    Exact mode tests disc = 0; modular mode (>= 10 primes) counts a walk as
    non-regular when its charpoly is non-squarefree at every carried prime.
    """
    if config.mode != EXACT and len(config.primes) < 10:
        raise ConfigError("modular non-regularity needs at least 10 carried primes")
    rows = []
    for n in grid:
        cfg = config.with_length(int(n))
        bad = 0
        for t in range(trials):
            state = run_walk(cfg, t, stream=(_DECAY, int(n)))
            if cfg.mode == EXACT:
                bad += algebra.discriminant(walk_charpoly(state, EXACT)) == 0
            else:
                polys = walk_charpoly(state, MODULAR)
                bad += all(not algebra.squarefree_mod(pl, p) for pl, p in zip(polys, state.primes))
        rows.append(DecayRow(int(n), trials, int(bad)))
    return rows
