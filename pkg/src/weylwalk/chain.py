"""Finite coset Markov chains: kernels, spectral gaps, visit-count deviations.

A walk on a group induces a chain on a finite quotient (set of cosets) with
kernel K(c, c') = sum of p(s) over steps s taking c to c'.  For symmetric
step laws K is symmetric and the uniform law is stationary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from . import algebra
from .kernels import iota_hits
from .weyl import ClassTable

MAX_STATES = 4096


class ChainError(ValueError):
    pass


@dataclass(frozen=True)
class ChainSpec:
    states: tuple
    kernel: tuple  # rows of Fractions
    start: int = 0

    def __post_init__(self):
        n = len(self.states)
        if n < 1 or len(self.kernel) != n or any(len(r) != n for r in self.kernel):
            raise ChainError("kernel must be square with one row per state")
        for r in self.kernel:
            if any(x < 0 for x in r):
                raise ChainError("kernel entries must be nonnegative")
            if sum(r, Fraction(0)) != 1:
                raise ChainError("kernel rows must sum to 1")
        for i in range(n):
            for j in range(i + 1, n):
                if self.kernel[i][j] != self.kernel[j][i]:
                    raise ChainError(f"kernel is not symmetric at ({i}, {j})")
        if not 0 <= self.start < n:
            raise ChainError("start index out of range")

    @property
    def size(self) -> int:
        return len(self.states)

    def matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.kernel])

    def is_irreducible(self) -> bool:
        seen = {self.start}
        todo = [self.start]
        while todo:
            i = todo.pop()
            for j, x in enumerate(self.kernel[i]):
                if x and j not in seen:
                    seen.add(j)
                    todo.append(j)
        return len(seen) == self.size

    def to_json(self) -> dict:
        return {
            "states": [s if isinstance(s, (int, str)) else str(s) for s in self.states],
            "kernel": [[f"{x.numerator}/{x.denominator}" for x in r] for r in self.kernel],
            "start": self.start,
        }

    @classmethod
    def from_json(cls, obj) -> "ChainSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(
                tuple(obj["states"]),
                tuple(tuple(Fraction(x) for x in r) for r in obj["kernel"]),
                int(obj.get("start", 0)),
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, ChainError):
                raise
            raise ChainError(f"bad chain spec: {exc}") from exc


def kernel_from_walk(
    labels: Sequence[Hashable],
    weights: Sequence,
    states: Sequence[Hashable],
    action: Callable | Mapping,
    start: int = 0,
    inverses: Mapping | None = None,
) -> ChainSpec:
    """Kernel induced on ``states`` by a step law.

    ``action`` is either ``action(state, label) -> state`` or a mapping
    ``label -> {state: state}``.  With ``inverses`` (label -> label) the
    condition p(s) = p(s^-1) is checked directly; the kernel symmetry check
    catches any remaining asymmetry.
    """
    weights = [Fraction(w) for w in weights]
    if len(weights) != len(labels) or any(w <= 0 for w in weights) or sum(weights) != 1:
        raise ChainError("weights must be positive, one per label, summing to 1")
    if inverses is not None:
        wmap = dict(zip(labels, weights))
        for s, t in inverses.items():
            if wmap[s] != wmap[t]:
                raise ChainError(f"p({s}) != p({t}) for inverse pair")
    act = action if callable(action) else (lambda c, s: action[s][c])
    index = {c: i for i, c in enumerate(states)}
    n = len(states)
    if n > MAX_STATES:
        raise ChainError(f"at most {MAX_STATES} states supported")
    rows = [[Fraction(0)] * n for _ in range(n)]
    for c in states:
        for s, w in zip(labels, weights):
            tgt = act(c, s)
            if tgt not in index:
                raise ChainError(f"step {s} maps {c} outside the state set")
            rows[index[c]][index[tgt]] += w
    spec = ChainSpec(tuple(states), tuple(tuple(r) for r in rows), start)
    if not spec.is_irreducible():
        raise ChainError("induced chain is not irreducible")
    return spec


def quotient_chain(config, p: int) -> ChainSpec:
    """Chain induced by a walk config on its image in G(F_p) (right cosets
    of the congruence kernel), with states discovered by closure."""
    from .walker import bfs_closure_keys, _unpack

    d = config.group.dim
    gm = np.array([g.astype(np.int64) % p for g, _ in config.generators])
    keys = bfs_closure_keys(gm, p, d, cap=MAX_STATES)
    mats = _unpack(keys, p, d)
    states = [tuple(m.flatten().tolist()) for m in mats]
    labels = list(range(len(config.generators)))

    def act(c, s):
        m = np.array(c, dtype=np.int64).reshape(d, d)
        return tuple(((m @ gm[s]) % p).flatten().tolist())

    eye = tuple(np.eye(d, dtype=np.int64).flatten().tolist())
    return kernel_from_walk(labels, config.weights, states, act, start=states.index(eye))


def spectral_gap(spec: ChainSpec) -> float:
    """1 - (second largest eigenvalue) of the symmetric kernel."""
    if spec.size == 1:
        return 1.0
    ev = np.linalg.eigvalsh(spec.matrix())
    return float(1.0 - ev[-2])


def lezaud_bound(spec: ChainSpec, n: int, beta: float | None = None) -> float:
    """e^(beta/5) |C|^(3/2) exp(-beta (n+1) / (12 (2|C|)^2))."""
    if beta is None:
        beta = spectral_gap(spec)
    return _lezaud(beta, spec.size, n)


def _lezaud(beta, n_states, n):
    return math.exp(beta / 5) * n_states**1.5 * math.exp(-beta * (n + 1) / (48 * n_states**2))


@dataclass
class DeviationReport:
    grid: list
    trials: int
    hits: list
    bound: list
    beta: float

    @property
    def empirical(self) -> list:
        return [h / self.trials for h in self.hits]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "empirical", "bound", "beta"])
        for n, e, b in zip(self.grid, self.empirical, self.bound):
            w.writerow([n, repr(e), repr(b), repr(self.beta)])
        return buf.getvalue()

    def decay_fit(self) -> tuple[float, float]:
        """(slope, R^2) of log(empirical) against n over nonzero estimates."""
        pts = [(n, math.log(e)) for n, e in zip(self.grid, self.empirical) if e > 0]
        if len(pts) < 3:
            return float("nan"), float("nan")
        x, y = np.array(pts).T
        slope, icept = np.polyfit(x, y, 1)
        resid = y - (slope * x + icept)
        ss_tot = ((y - y.mean()) ** 2).sum()
        r2 = 1.0 - (resid**2).sum() / ss_tot if ss_tot > 0 else float("nan")
        return float(slope), float(r2)


def simulate_iota(spec: ChainSpec, grid: Sequence[int], trials: int, rng, chunk: int = 20000) -> DeviationReport:
    """Monte Carlo estimate of P(iota_n < (n+1)/(2|C|)) on ``grid``.

    iota_n counts the indices 0 <= i <= n with X_i = X_n, so iota_n >= 1.
    """
    if trials < 1:
        raise ChainError("need at least one trial")
    grid = sorted(int(n) for n in grid)
    if not grid or grid[0] < 0:
        raise ChainError("grid must be nonempty and nonnegative")
    n_max = grid[-1]
    cum = np.cumsum(spec.matrix(), axis=1)
    cum[:, -1] = 1.0
    hits = np.zeros(len(grid), dtype=np.int64)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        u = rng.random((m, n_max))
        hits += iota_hits(cum, spec.start, u, np.array(grid))
        done += m
    beta = spectral_gap(spec)
    bound = [_lezaud(beta, spec.size, n) for n in grid]
    return DeviationReport(grid, trials, hits.tolist(), bound, beta)


def final_states(spec: ChainSpec, n: int, trials: int, rng) -> np.ndarray:
    """X_n for ``trials`` independent runs started at ``spec.start``."""
    cum = np.cumsum(spec.matrix(), axis=1)
    cum[:, -1] = 1.0
    x = np.full(trials, spec.start, dtype=np.int64)
    for _ in range(n):
        u = rng.random(trials)
        x = (u[:, None] >= cum[x]).sum(axis=1)
    return x


def sieve_density(table: ClassTable, cls, prime_bound: int) -> Fraction:
    """(|C|/|W|) * pi(L): leading-order sieve mass for a single coset."""
    if prime_bound < 2:
        raise ChainError("prime bound must be at least 2")
    return table.fractions[cls] * algebra.prime_count(int(prime_bound))


def two_state(stay: Fraction) -> ChainSpec:
    stay = Fraction(stay)
    return ChainSpec((0, 1), ((stay, 1 - stay), (1 - stay, stay)), 0)
