"""Command-line entry point: ``weylwalk <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import algebra, census, chain, harness
from .walker import ConfigError, GroupSpec, InvariantError, WalkConfig, default_primes, load_config, run_walk, walk_charpoly

EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _grid(text: str) -> list[int]:
    """``10:100:10`` (inclusive) or ``10,20,50``."""
    try:
        if ":" in text:
            a, b, *s = (int(x) for x in text.split(":"))
            return list(range(a, b + 1, s[0] if s else 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _walk_config(args, length: int = 0) -> WalkConfig:
    if args.config:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = WalkConfig.build(cfg.group, cfg.length, args.seed, cfg.mode, cfg.primes,
                                   cfg.generators, cfg.weights, cfg.check_every)
        return cfg
    if not args.group:
        raise ConfigError("give --group or --config")
    group = GroupSpec.parse(args.group)
    mode = getattr(args, "mode", None) or "modular"
    primes = default_primes(group, args.primes, args.prime_min) if mode != "exact" else ()
    return WalkConfig.build(group, length, args.seed or 0, mode, primes)


def _emit(args, payload, rows=None, header=None):
    """JSON payload, or CSV when --format csv and tabular rows are given."""
    if args.format == "csv" and rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_walk(args):
    cfg = _walk_config(args, args.length or 0)
    if args.length is not None and args.config:
        cfg = cfg.with_length(args.length)
    state = run_walk(cfg, args.trial, keep_steps=True)
    out = {"group": cfg.group.name, "n": state.n, "trial": args.trial, "mode": cfg.mode,
           "steps": [cfg.labels[s] for s in state.steps[:200]]}
    if state.exact is not None:
        out["matrix"] = [[int(x) for x in r] for r in state.exact.tolist()]
        out["charpoly"] = list(walk_charpoly(state, "exact"))
    if state.modular is not None:
        polys = walk_charpoly(state, "modular")
        out["charpoly_mod"] = [{"p": p, "coeffs": c} for p, c in zip(state.primes, polys)]
    _emit(args, out)


def cmd_galois(args):
    if args.matrix:
        m = algebra.read_matrix(Path(args.matrix).read_text())
        if args.group:
            group = GroupSpec.parse(args.group)
        else:
            group = GroupSpec.sl(m.shape[0])
        if not group.contains(m):
            raise ConfigError(f"matrix is not in {group.name}")
        target = m
    else:
        cfg = _walk_config(args, args.length or 0)
        if args.length is not None:
            cfg = cfg.with_length(args.length)
        group = cfg.group
        target = run_walk(cfg, args.trial)
    res = harness.galois_certify(target, group, args.budget, args.prime_min)
    _emit(args, {
        "verdict": res.verdict,
        "observed": [c.to_json() for c in sorted(res.certificate.observed)],
        "missing": [c.to_json() for c in res.certificate.missing],
        "primes_used": res.primes_used,
        "observations": [o.to_json() for o in res.observations],
    })


def cmd_survey(args):
    cfg = _walk_config(args)
    res = harness.survey(cfg, _grid(args.grid), args.trials, args.budget, args.prime_min,
                         workers=args.threads, timing=args.timing)
    if args.jsonl:
        Path(args.jsonl).write_text(res.jsonl())
    kind, c = res.decay_rate()
    rows = [[r.n, r.trials, r.certified, r.fraction, *r.wilson, r.mean_primes] for r in res.rows]
    payload = {
        "group": cfg.group.name,
        "rows": [dict(zip(["n", "trials", "certified", "fraction", "wilson_lo", "wilson_hi", "mean_primes"], r))
                 | {"histogram": s.histogram} for r, s in zip(rows, res.rows)],
        "decay_rate": {"relation": kind, "c": c},
    }
    _emit(args, payload, rows, ["n", "trials", "certified", "fraction", "wilson_lo", "wilson_hi", "mean_primes"])


def cmd_tau(args):
    cfg = _walk_config(args)
    samples = harness.estimate_tau(cfg, args.trials, args.n_max, args.budget, args.prime_min)
    taus = [s.tau for s in samples if not s.censored]
    payload = {
        "group": cfg.group.name,
        "samples": [s.to_json() for s in samples],
        "median": float(np.median(taus)) if taus else None,
        "censored": sum(s.censored for s in samples),
    }
    _emit(args, payload, [[s.trial, s.tau, s.censored] for s in samples], ["trial", "tau", "censored"])


def cmd_equidist(args):
    group = GroupSpec.parse(args.group)
    rng = np.random.default_rng(args.seed or 0)
    reports = [census.run_census(group, q, args.mode, args.samples, rng) for q in _grid(args.q)]
    rows = [[r.q, str(c), r.counts[c], r.frequency(c), float(r.targets[c]), r.deviation(c), r.rs_fraction]
            for r in reports for c in r.targets]
    _emit(args, [r.to_json() for r in reports], rows,
          ["q", "class", "count", "frequency", "target", "deviation", "rs_fraction"])


def cmd_chain(args):
    if args.spec:
        spec = chain.ChainSpec.from_json(Path(args.spec).read_text())
    elif args.quotient:
        cfg = _walk_config(args)
        spec = chain.quotient_chain(cfg, args.quotient)
    else:
        spec = chain.two_state(Fraction(args.two_state))
    rng = np.random.default_rng(args.seed or 0)
    rep = chain.simulate_iota(spec, _grid(args.grid), args.trials, rng)
    slope, r2 = rep.decay_fit()
    if args.format == "csv":
        text = rep.to_csv()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return
    _emit(args, {"states": spec.size, "beta": rep.beta, "grid": rep.grid, "empirical": rep.empirical,
                 "bound": rep.bound, "slope": slope, "r2": r2})


def cmd_torus(args):
    rng = np.random.default_rng(args.seed or 0)
    rows = harness.torus_demo(_grid(args.grid), args.mode, args.trials, rng)
    table = [[r.n, r.prob, r.scaled, r.scaled / harness.TORUS_LIMIT] for r in rows]
    _emit(args, {"limit": harness.TORUS_LIMIT,
                 "rows": [dict(zip(["n", "prob", "sqrt_n_prob", "ratio_to_limit"], t)) for t in table]},
          table, ["n", "prob", "sqrt_n_prob", "ratio_to_limit"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weylwalk", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None, help="write output here instead of stdout")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def walk_opts(p, modes=True):
        p.add_argument("--group", help="SL3, Sp4, ...")
        p.add_argument("--config", help="walk config JSON")
        p.add_argument("--primes", type=int, default=300, help="number of carried primes")
        p.add_argument("--prime-min", type=int, default=None)
        if modes:
            p.add_argument("--mode", choices=("exact", "modular", "dual"), default=None)

    p = sub.add_parser("walk", help="run one walk and print X_n and its charpoly")
    walk_opts(p)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--trial", type=int, default=0)
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("galois", help="certify Gal = W for a matrix or a walk")
    walk_opts(p)
    p.add_argument("--matrix", help="matrix text file")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--budget", type=int, default=100)
    p.set_defaults(func=cmd_galois)

    p = sub.add_parser("survey", help="certified fraction over a grid of walk lengths")
    walk_opts(p, modes=False)
    p.add_argument("--grid", default="10:100:10")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--budget", type=int, default=300)
    p.add_argument("--jsonl", help="per-trial records")
    p.add_argument("--timing", action="store_true", help="fill wall_ms (breaks byte reproducibility)")
    p.set_defaults(func=cmd_survey, mode="modular")

    p = sub.add_parser("tau", help="stopping time of first certification")
    walk_opts(p, modes=False)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--budget", type=int, default=200)
    p.set_defaults(func=cmd_tau, mode="modular")

    p = sub.add_parser("equidist", help="census of theta over G(F_q)")
    p.add_argument("--group", default="SL2")
    p.add_argument("--q", default="11,23,47,101")
    p.add_argument("--mode", choices=("enumerate", "bfs", "sample"), default="enumerate")
    p.add_argument("--samples", type=int, default=10**6)
    p.set_defaults(func=cmd_equidist)

    p = sub.add_parser("chain", help="visit-count large deviations for a coset chain")
    walk_opts(p, modes=False)
    p.add_argument("--spec", help="ChainSpec JSON")
    p.add_argument("--quotient", type=int, help="use the walk's image mod this prime")
    p.add_argument("--two-state", default="9/10", help="stay probability of the 2-state benchmark")
    p.add_argument("--grid", default="50:500:50")
    p.add_argument("--trials", type=int, default=10**5)
    p.set_defaults(func=cmd_chain, mode="modular")

    p = sub.add_parser("torus-demo", help="P(m_1 + ... + m_n = 0) for the torus example")
    p.add_argument("--grid", default="1,2,10,100,1000,10000")
    p.add_argument("--mode", choices=("exact", "montecarlo"), default="exact")
    p.add_argument("--trials", type=int, default=10**5)
    p.set_defaults(func=cmd_torus)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, chain.ChainError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantError, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
