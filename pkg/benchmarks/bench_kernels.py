"""Compare the numba and numpy backends of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once per backend to warm up (numba compiles on first
call), then ``--repeat`` timed runs; the best time is reported.  Outputs of
the two backends are checked for equality before timing.
"""

import argparse
import time

import numpy as np

from weylwalk import kernels
from weylwalk._jit import HAVE_NUMBA
from weylwalk.walker import GroupSpec, default_generators, default_primes


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    group = GroupSpec.sl(3)
    gens = np.array([g.astype(np.int64) for g, _ in default_generators(group)])
    primes = np.array(default_primes(group, 300), dtype=np.int64)
    steps = rng.integers(0, len(gens), size=100)
    yield "walk_mod   SL3 n=100 K=300", lambda b: kernels.walk_mod(gens, steps, primes, backend=b)

    sp = GroupSpec.sp(2)
    sgens = np.array([g.astype(np.int64) for g, _ in default_generators(sp)])
    sprimes = np.array(default_primes(sp, 200), dtype=np.int64)
    ssteps = rng.integers(0, len(sgens), size=60)
    yield "walk_mod   Sp4 n=60 K=200 rec", lambda b: kernels.walk_mod(sgens, ssteps, sprimes, record=True, backend=b)

    mats = rng.integers(0, 101, size=(200_000, 3, 3))
    yield "charpoly   3x3 N=200000", lambda b: kernels.charpoly_batch(mats, 101, backend=b)

    mats4 = rng.integers(0, 2**31 - 1, size=(50_000, 4, 4))
    yield "charpoly   4x4 N=50000 p~2^31", lambda b: kernels.charpoly_batch(mats4, 2**31 - 1, backend=b)

    cum = np.array([[0.9, 1.0], [0.1, 1.0]])
    u = rng.random((20_000, 500))
    grid = np.arange(50, 501, 50)
    yield "iota_hits  2-state 20000x500", lambda b: kernels.iota_hits(cum, 0, u, grid, backend=b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba is not installed; timing the numpy backend only")
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, run in cases(np.random.default_rng(args.seed)):
        outs = [run(b) for b in backends]  # warm-up, and the equality check
        if len(outs) == 2 and not np.array_equal(outs[0], outs[1]):
            raise SystemExit(f"{name}: backends disagree")
        t = [best_of(lambda b=b: run(b), args.repeat) for b in backends]
        line = f"{name:32s}" + "".join(f"{x * 1e3:10.2f}ms" for x in t)
        if len(t) == 2:
            line += f"{t[0] / t[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
