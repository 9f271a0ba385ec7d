"""Random walks on SL(m, Z) and Sp(2g, Z).

A walk is X_0 = 1, X_{n+1} = X_n * xi_{n+1} with i.i.d. steps drawn from a
symmetric generating set containing the identity.  States are carried
exactly (object-dtype big-integer matrices), modulo a list of primes
(int64 arrays, one slice per prime), or both at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import algebra
from .kernels import charpoly_batch, walk_mod
from .rng import StepSampler, substream

EXACT = "exact"
MODULAR = "modular"
DUAL = "dual"
MODES = (EXACT, MODULAR, DUAL)

BFS_CAP = 10**7
_BFS_CHUNK = 1 << 16


class ConfigError(ValueError):
    """Invalid walk or experiment configuration."""


class InvariantError(AssertionError):
    """A mathematical invariant was violated at runtime."""


@dataclass(frozen=True)
class GroupSpec:
    family: str  # "A" for SL(m), "C" for Sp(2g)
    rank: int  # m, or g

    def __post_init__(self):
        if self.family not in ("A", "C"):
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family == "A" and self.rank < 2:
            raise ConfigError("SL(m) needs m >= 2")
        if self.family == "C" and self.rank < 1:
            raise ConfigError("Sp(2g) needs g >= 1")

    @classmethod
    def sl(cls, m: int) -> "GroupSpec":
        return cls("A", m)

    @classmethod
    def sp(cls, g: int) -> "GroupSpec":
        return cls("C", g)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``SL3``, ``SL(3)``, ``Sp4``, ``Sp(4)`` (Sp takes 2g)."""
        t = text.replace("(", "").replace(")", "").replace(",", "").strip().upper()
        try:
            if t.startswith("SL"):
                return cls.sl(int(t[2:]))
            if t.startswith("SP"):
                n = int(t[2:])
                if n % 2:
                    raise ConfigError("Sp(n) needs even n")
                return cls.sp(n // 2)
        except ValueError as exc:
            raise ConfigError(f"cannot parse group {text!r}") from exc
        raise ConfigError(f"cannot parse group {text!r}")

    @property
    def dim(self) -> int:
        return self.rank if self.family == "A" else 2 * self.rank

    @property
    def name(self) -> str:
        return f"SL({self.rank})" if self.family == "A" else f"Sp({2 * self.rank})"

    @property
    def form(self) -> np.ndarray:
        """The symplectic form J = [[0, I], [-I, 0]] (type C only)."""
        g = self.rank
        j = np.zeros((2 * g, 2 * g), dtype=object)
        for i in range(g):
            j[i, g + i] = 1
            j[g + i, i] = -1
        return j

    def contains(self, m) -> bool:
        m = np.asarray(m, dtype=object)
        if m.shape != (self.dim, self.dim):
            return False
        if self.family == "A":
            return algebra.charpoly_exact(m)[0] * (-1) ** self.dim == 1
        j = self.form
        return bool((m.T.dot(j).dot(m) == j).all())

    def contains_mod(self, m, p: int) -> bool:
        m = np.asarray(m, dtype=np.int64)
        if self.family == "A":
            c0 = int(charpoly_batch(m[None], p)[0, 0])
            return (c0 * (-1) ** self.dim - 1) % p == 0
        j = self.form.astype(np.int64) % p
        lhs = (m.T.astype(object).dot(j.astype(object)).dot(m.astype(object))) % p
        return bool((lhs == j).all())

    def order_mod(self, p: int) -> int:
        if self.family == "A":
            m = self.rank
            return p ** (m * (m - 1) // 2) * prod(p**i - 1 for i in range(2, m + 1))
        g = self.rank
        return p ** (g * g) * prod(p ** (2 * i) - 1 for i in range(1, g + 1))


def default_generators(group: GroupSpec) -> list[tuple[np.ndarray, str]]:
    """Identity plus I +- E_ij (SL) or symplectic transvections (Sp).

    Sp transvections are x -> x +- <x, v> v with <x, y> = x^T J y, for v a
    standard basis vector or e_i + e_j (i < j).
    """
    d = group.dim
    eye = np.eye(d, dtype=np.int64).astype(object)
    gens = [(eye.copy(), "I")]
    if group.family == "A":
        for i in range(d):
            for j in range(d):
                if i != j:
                    for sign, tag in ((1, "+"), (-1, "-")):
                        m = eye.copy()
                        m[i, j] = sign
                        gens.append((m, f"E{i + 1}{j + 1}{tag}"))
        return gens
    jform = group.form
    vecs = []
    for i in range(d):
        v = np.zeros(d, dtype=object)
        v[i] = 1
        vecs.append((v, f"e{i + 1}"))
    for i in range(d):
        for j in range(i + 1, d):
            v = np.zeros(d, dtype=object)
            v[i] = v[j] = 1
            vecs.append((v, f"e{i + 1}+e{j + 1}"))
    for v, name in vecs:
        jv = jform.dot(v)
        for sign, tag in ((1, "+"), (-1, "-")):
            m = eye + sign * np.outer(v, jv)
            gens.append((m, f"T({name}){tag}"))
    return gens


def _pack(mats, p):
    """Base-p keys for a (N, d, d) stack; requires p**(d*d) < 2**63."""
    n, d, _ = mats.shape
    flat = mats.reshape(n, d * d)
    key = np.zeros(n, dtype=np.int64)
    for i in range(d * d):
        key = key * p + flat[:, i]
    return key


def _unpack(keys, p, d):
    out = np.zeros((keys.shape[0], d * d), dtype=np.int64)
    k = keys.copy()
    for i in range(d * d - 1, -1, -1):
        out[:, i] = k % p
        k //= p
    return out.reshape(-1, d, d)


def bfs_closure_keys(gens_mod: np.ndarray, p: int, d: int, cap: int = BFS_CAP) -> np.ndarray:
    """Sorted packed keys of the group generated by ``gens_mod`` mod p."""
    if float(p) ** (d * d) >= 2.0**63:
        raise ConfigError(f"cannot pack {d}x{d} matrices mod {p} into 64-bit keys")
    # only packed keys are kept; the frontier is unpacked a chunk at a time
    visited = _pack(np.eye(d, dtype=np.int64)[None], p)
    frontier = visited
    while frontier.shape[0]:
        fresh = []
        for start in range(0, frontier.shape[0], _BFS_CHUNK):
            mats = _unpack(frontier[start : start + _BFS_CHUNK], p, d)
            keys = np.unique(np.concatenate([_pack((mats @ g) % p, p) for g in gens_mod]))
            pos = np.searchsorted(visited, keys).clip(max=visited.shape[0] - 1)
            fresh.append(keys[visited[pos] != keys])
        frontier = np.unique(np.concatenate(fresh))
        visited = np.union1d(visited, frontier)
        if visited.shape[0] > cap:
            raise ConfigError(f"BFS closure exceeds cap {cap}")
    return visited


def verify_generation_mod_p(group: GroupSpec, generators, p: int, cap: int = BFS_CAP) -> tuple[bool, int]:
    """(generates the full group mod p?, closure size)."""
    order = group.order_mod(p)
    if order > cap:
        raise ConfigError(f"|G(F_{p})| = {order} exceeds the BFS cap {cap}")
    gm = np.array([np.asarray(g, dtype=object) % p for g, *_ in _as_pairs(generators)], dtype=np.int64)
    size = bfs_closure_keys(gm, p, group.dim, cap).shape[0]
    return size == order, size


def _as_pairs(generators):
    out = []
    for g in generators:
        if isinstance(g, tuple):
            out.append(g)
        else:
            out.append((g, ""))
    return out


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class WalkConfig:
    group: GroupSpec
    generators: tuple  # of (object ndarray, label)
    weights: tuple  # of Fraction
    length: int
    seed: int = 0
    mode: str = MODULAR
    primes: tuple = ()
    check_every: int = 64
    inverse_index: tuple = field(default=(), compare=False)

    @classmethod
    def build(
        cls,
        group: GroupSpec,
        length: int,
        seed: int = 0,
        mode: str = MODULAR,
        primes: Sequence[int] = (),
        generators=None,
        weights=None,
        check_every: int = 64,
    ) -> "WalkConfig":
        gens = tuple(_as_pairs(generators)) if generators is not None else tuple(default_generators(group))
        gens = tuple((algebra.as_int_matrix(np.asarray(g, dtype=object).tolist()), lbl) for g, lbl in gens)
        if weights is None:
            weights = [Fraction(1, len(gens))] * len(gens)
        weights = tuple(Fraction(w) for w in weights)
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        primes = tuple(int(p) for p in primes)
        if mode != EXACT and not primes:
            raise ConfigError("modular and dual modes need a prime list")
        for p in primes:
            if not algebra.is_probable_prime(p):
                raise ConfigError(f"{p} is not prime")
            if p >= 2**31:
                raise ConfigError("carried primes must be below 2**31")
        if length < 0:
            raise ConfigError("walk length must be nonnegative")
        cfg = cls(group, gens, weights, int(length), int(seed), mode, primes, int(check_every))
        return cfg._validated()

    def _validated(self) -> "WalkConfig":
        if len(self.weights) != len(self.generators):
            raise ConfigError("one weight per generator required")
        if any(w <= 0 for w in self.weights) or sum(self.weights) != 1:
            raise ConfigError("weights must be positive and sum to 1")
        d = self.group.dim
        keys = {}
        for i, (g, lbl) in enumerate(self.generators):
            if g.shape != (d, d):
                raise ConfigError(f"generator {lbl or i} has shape {g.shape}, expected {(d, d)}")
            if not self.group.contains(g):
                raise ConfigError(f"generator {lbl or i} is not in {self.group.name}")
            keys.setdefault(tuple(g.flatten().tolist()), i)
        eye = tuple(np.eye(d, dtype=np.int64).flatten().tolist())
        if eye not in keys:
            raise ConfigError("the generating set must contain the identity")
        inv = []
        for i, (g, lbl) in enumerate(self.generators):
            gi = tuple(algebra.exact_inverse(g).flatten().tolist())
            j = keys.get(gi)
            if j is None:
                raise ConfigError(f"inverse of generator {lbl or i} is missing")
            if self.weights[j] != self.weights[i]:
                raise ConfigError(f"generator {lbl or i} and its inverse have different weights")
            inv.append(j)
        object.__setattr__(self, "inverse_index", tuple(inv))
        return self

    def with_length(self, n: int) -> "WalkConfig":
        cfg = WalkConfig(self.group, self.generators, self.weights, int(n), self.seed, self.mode,
                         self.primes, self.check_every, self.inverse_index)
        return cfg

    def with_mode(self, mode: str, primes: Sequence[int] | None = None) -> "WalkConfig":
        return WalkConfig.build(self.group, self.length, self.seed, mode,
                                self.primes if primes is None else primes,
                                self.generators, self.weights, self.check_every)

    @property
    def gens_array(self) -> np.ndarray:
        return np.array([g.astype(np.int64) for g, _ in self.generators], dtype=np.int64)

    @property
    def labels(self) -> list[str]:
        return [lbl for _, lbl in self.generators]

    def symmetry_defect(self) -> Fraction:
        """Sum over s of |p(s) - p(s^-1)|; zero for valid configs."""
        return sum((abs(self.weights[i] - self.weights[j]) for i, j in enumerate(self.inverse_index)), Fraction(0))


def default_primes(group: GroupSpec, count: int, lower: int | None = None) -> list[int]:
    if lower is None:
        lower = 5 if group.family == "C" else 2
    return algebra.primes_from(lower, count)


def load_config(source) -> WalkConfig:
    """WalkConfig from a JSON file path, JSON text, or an already-parsed dict.

    Keys: ``group`` ("SL3", "Sp4", or {"family": "A", "rank": 3}), ``length``,
    ``seed``, ``mode``, ``primes`` (a list or {"count": K, "min": B}),
    ``generators`` (list of matrix file paths, optional), ``weights`` (list of
    "num/den" strings, optional), ``check_every``.
    """
    base = Path(".")
    if isinstance(source, dict):
        obj = source
    else:
        text = str(source)
        if Path(text).exists():
            base = Path(text).parent
            text = Path(text).read_text()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        grp = obj["group"]
        group = GroupSpec.parse(grp) if isinstance(grp, str) else GroupSpec(grp["family"], int(grp["rank"]))
        mode = obj.get("mode", MODULAR)
        primes = obj.get("primes", [])
        if isinstance(primes, dict):
            primes = default_primes(group, int(primes["count"]), primes.get("min"))
        gens = None
        if obj.get("generators"):
            gens = []
            for path in obj["generators"]:
                fp = Path(path) if Path(path).is_absolute() else base / path
                gens.append((algebra.read_matrix(fp.read_text()), fp.stem))
        weights = obj.get("weights")
        if weights is not None:
            weights = [Fraction(w) for w in weights]
        return WalkConfig.build(
            group,
            int(obj.get("length", 0)),
            int(obj.get("seed", 0)),
            mode,
            primes,
            gens,
            weights,
            int(obj.get("check_every", 64)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc


# ---------------------------------------------------------------------------
# walks


@dataclass
class WalkState:
    n: int
    exact: Optional[np.ndarray] = None  # object dtype
    modular: Optional[np.ndarray] = None  # (K, d, d) int64
    primes: tuple = ()
    steps: Optional[np.ndarray] = None

    def check_consistency(self) -> bool:
        if self.exact is None or self.modular is None:
            return True
        for k, p in enumerate(self.primes):
            if not ((self.exact % p).astype(np.int64) == self.modular[k]).all():
                return False
        return True


def draw_steps(config: WalkConfig, trial_index: int, n: int | None = None, stream=()) -> np.ndarray:
    """Generator indices for one trial; fixed by (seed, *stream, trial_index)."""
    n = config.length if n is None else n
    rng = substream(config.seed, *stream, trial_index)
    return StepSampler(config.weights).draw(rng, n)


def exact_product(config: WalkConfig, steps) -> np.ndarray:
    gens = [g for g, _ in config.generators]
    cur = np.eye(config.group.dim, dtype=np.int64).astype(object)
    every = config.check_every
    for t, s in enumerate(steps, start=1):
        cur = cur.dot(gens[s])
        if every and t % every == 0 and not config.group.contains(cur):
            raise InvariantError(f"walk left {config.group.name} at step {t}")
    return cur


def run_walk(config: WalkConfig, trial_index: int, stream=(), keep_steps: bool = False) -> WalkState:
    steps = draw_steps(config, trial_index, stream=stream)
    state = WalkState(config.length, primes=config.primes)
    if config.mode in (EXACT, DUAL):
        state.exact = exact_product(config, steps)
    if config.mode in (MODULAR, DUAL):
        state.modular = walk_mod(config.gens_array, steps, np.array(config.primes, dtype=np.int64))
        every = config.check_every
        if every and config.length >= every:
            for k, p in enumerate(config.primes[:3]):
                if not config.group.contains_mod(state.modular[k], p):
                    raise InvariantError(f"modular walk left {config.group.name} mod {p}")
    if config.mode == DUAL and not state.check_consistency():
        raise InvariantError("exact and modular walk states disagree")
    if keep_steps:
        state.steps = steps
    return state


def walk_charpoly(state: WalkState, mode: str | None = None):
    """Exact charpoly (tuple) or the list of per-prime charpolys mod p."""
    mode = mode or (EXACT if state.modular is None else MODULAR)
    if mode == EXACT:
        if state.exact is None:
            raise ConfigError("state carries no exact matrix")
        return algebra.charpoly_exact(state.exact)
    if state.modular is None:
        raise ConfigError("state carries no modular matrices")
    polys = charpoly_batch(state.modular, np.array(state.primes, dtype=np.int64))
    return [row.tolist() for row in polys]
