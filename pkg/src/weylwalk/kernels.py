"""Hot numeric kernels.

Each kernel exists twice: a loop version compiled with numba (``*_nb``) and
a vectorized numpy version (``*_np``).  The public names dispatch on
``weylwalk._jit.JIT_ENABLED``.  Both versions consume identical inputs and
return identical integer outputs, which the test suite checks.

All modular kernels expect primes below 2**31 and residues in [0, p).
"""

from __future__ import annotations

import numpy as np

from ._jit import HAVE_NUMBA, JIT_ENABLED, njit

MAX_KERNEL_PRIME = 2**31


# ---------------------------------------------------------------------------
# modular walks


def _walk_mod_loop(gens, steps, primes, record):
    k_count = primes.shape[0]
    d = gens.shape[1]
    n = steps.shape[0]
    n_out = n + 1 if record else 1
    out = np.zeros((n_out, k_count, d, d), dtype=np.int64)
    cur = np.zeros((d, d), dtype=np.int64)
    tmp = np.zeros((d, d), dtype=np.int64)
    for k in range(k_count):
        p = primes[k]
        for i in range(d):
            for j in range(d):
                cur[i, j] = 1 if i == j else 0
        if record:
            out[0, k] = cur
        for t in range(n):
            g = gens[steps[t]]
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for l in range(d):
                        acc = (acc + cur[i, l] * (g[l, j] % p)) % p
                    tmp[i, j] = acc
            for i in range(d):
                for j in range(d):
                    cur[i, j] = tmp[i, j]
            if record:
                out[t + 1, k] = cur
        if not record:
            out[0, k] = cur
    return out


def _walk_mod_np(gens, steps, primes, record):
    k_count = primes.shape[0]
    d = gens.shape[1]
    p = primes.reshape(-1, 1, 1)
    gmod = gens[None, :, :, :] % primes.reshape(-1, 1, 1, 1)  # (K, G, d, d)
    cur = np.broadcast_to(np.eye(d, dtype=np.int64), (k_count, d, d)).copy()
    hist = [cur] if record else None
    pk = p[:, :, :, None]
    for s in steps:
        g = gmod[:, s]
        prod = (cur[:, :, :, None] * g[:, None, :, :]) % pk
        cur = prod.sum(axis=2) % p
        if record:
            hist.append(cur)
    if record:
        return np.stack(hist)
    return cur[None]


# ---------------------------------------------------------------------------
# batched characteristic polynomials (Berkowitz, mod p)


def _charpoly_loop(mats, primes):
    n_mats = mats.shape[0]
    d = mats.shape[1]
    out = np.zeros((n_mats, d + 1), dtype=np.int64)
    vect = np.zeros(d + 1, dtype=np.int64)
    new = np.zeros(d + 1, dtype=np.int64)
    tcol = np.zeros(d + 1, dtype=np.int64)
    cur = np.zeros(d, dtype=np.int64)
    nxt = np.zeros(d, dtype=np.int64)
    for b in range(n_mats):
        p = primes[b]
        a = mats[b]
        vect[0] = 1
        vect[1] = (p - a[d - 1, d - 1] % p) % p
        for k in range(d - 2, -1, -1):
            m = d - 1 - k
            tcol[0] = 1
            tcol[1] = (p - a[k, k] % p) % p
            for i in range(m):
                cur[i] = a[k + 1 + i, k] % p
            for step in range(m):
                acc = 0
                for i in range(m):
                    acc = (acc + (a[k, k + 1 + i] % p) * cur[i]) % p
                tcol[2 + step] = (p - acc) % p
                for i in range(m):
                    acc = 0
                    for j in range(m):
                        acc = (acc + (a[k + 1 + i, k + 1 + j] % p) * cur[j]) % p
                    nxt[i] = acc
                for i in range(m):
                    cur[i] = nxt[i]
            for i in range(m + 2):
                acc = 0
                top = i if i < m else m
                for j in range(top + 1):
                    acc = (acc + tcol[i - j] * vect[j]) % p
                new[i] = acc
            for i in range(m + 2):
                vect[i] = new[i]
        for i in range(d + 1):
            out[b, i] = vect[d - i]
    return out


def _charpoly_np(mats, primes):
    n_mats, d = mats.shape[0], mats.shape[1]
    p = primes.astype(np.int64)
    pc = p[:, None]
    a = mats % p[:, None, None]
    vect = np.zeros((n_mats, d + 1), dtype=np.int64)
    vect[:, 0] = 1
    vect[:, 1] = (-a[:, d - 1, d - 1]) % p
    for k in range(d - 2, -1, -1):
        m = d - 1 - k
        row = a[:, k, k + 1 :]
        sub = a[:, k + 1 :, k + 1 :]
        cur = a[:, k + 1 :, k].copy()
        tcol = np.zeros((n_mats, m + 2), dtype=np.int64)
        tcol[:, 0] = 1
        tcol[:, 1] = (-a[:, k, k]) % p
        for step in range(m):
            tcol[:, 2 + step] = (-(((row * cur) % pc).sum(axis=1) % p)) % p
            cur = ((sub * cur[:, None, :]) % p[:, None, None]).sum(axis=2) % pc
        new = np.zeros((n_mats, d + 1), dtype=np.int64)
        for i in range(m + 2):
            acc = np.zeros(n_mats, dtype=np.int64)
            for j in range(min(i, m) + 1):
                acc = (acc + tcol[:, i - j] * vect[:, j]) % p
            new[:, i] = acc
        vect = new
    return vect[:, d::-1].copy()


# ---------------------------------------------------------------------------
# coset-chain Monte Carlo


def _iota_loop(cum, start, uniforms, grid):
    trials, n_max = uniforms.shape
    n_states = cum.shape[0]
    hits = np.zeros(grid.shape[0], dtype=np.int64)
    counts = np.zeros(n_states, dtype=np.int64)
    for t in range(trials):
        for s in range(n_states):
            counts[s] = 0
        state = start
        counts[state] = 1
        gi = 0
        while gi < grid.shape[0] and grid[gi] == 0:
            if 2 * counts[state] * n_states < 1:
                hits[gi] += 1
            gi += 1
        for i in range(n_max):
            u = uniforms[t, i]
            nxt = 0
            while nxt < n_states - 1 and u >= cum[state, nxt]:
                nxt += 1
            state = nxt
            counts[state] += 1
            n = i + 1
            while gi < grid.shape[0] and grid[gi] == n:
                # iota_n < (n + 1) / (2 |C|)
                if 2 * counts[state] * n_states < n + 1:
                    hits[gi] += 1
                gi += 1
    return hits


def _iota_np(cum, start, uniforms, grid):
    trials, n_max = uniforms.shape
    n_states = cum.shape[0]
    hits = np.zeros(grid.shape[0], dtype=np.int64)
    idx = np.arange(trials)
    state = np.full(trials, start, dtype=np.int64)
    counts = np.zeros((trials, n_states), dtype=np.int64)
    counts[idx, state] = 1
    want = {int(n): i for i, n in enumerate(grid)}
    if 0 in want:
        hits[want[0]] = int((2 * counts[idx, state] * n_states < 1).sum())
    for i in range(n_max):
        u = uniforms[:, i]
        # number of cumulative thresholds u has passed, capped at the last state
        state = np.minimum((u[:, None] >= cum[state, :]).sum(axis=1), n_states - 1)
        counts[idx, state] += 1
        n = i + 1
        if n in want:
            hits[want[n]] = int((2 * counts[idx, state] * n_states < n + 1).sum())
    return hits


# ---------------------------------------------------------------------------
# dispatch

if HAVE_NUMBA:
    _walk_mod_nb = njit(cache=True)(_walk_mod_loop)
    _charpoly_nb = njit(cache=True)(_charpoly_loop)
    _iota_nb = njit(cache=True)(_iota_loop)
else:  # pragma: no cover
    _walk_mod_nb = _walk_mod_loop
    _charpoly_nb = _charpoly_loop
    _iota_nb = _iota_loop

BACKENDS = {
    "numba": {"walk_mod": _walk_mod_nb, "charpoly": _charpoly_nb, "iota": _iota_nb},
    "numpy": {"walk_mod": _walk_mod_np, "charpoly": _charpoly_np, "iota": _iota_np},
}
BACKEND = "numba" if JIT_ENABLED else "numpy"


def _check_primes(primes):
    if primes.size and (primes.max() >= MAX_KERNEL_PRIME or primes.min() < 2):
        raise ValueError("kernel primes must lie in [2, 2**31)")


def walk_mod(gens, steps, primes, record=False, backend=None):
    """Products of generators mod each prime.

    ``gens`` is (G, d, d) int64 (any sign), ``steps`` indexes into it, and
    ``primes`` is (K,).  Returns (K, d, d) final states, or with ``record``
    the (n + 1, K, d, d) array of every prefix product.
    """
    gens = np.ascontiguousarray(gens, dtype=np.int64)
    steps = np.ascontiguousarray(steps, dtype=np.int64)
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    _check_primes(primes)
    out = BACKENDS[backend or BACKEND]["walk_mod"](gens, steps, primes, record)
    return out if record else out[0]


def charpoly_batch(mats, primes, backend=None):
    """Ascending det(T*I - M) mod p for a stack of matrices.

    ``mats`` is (N, d, d); ``primes`` is a scalar or an (N,) array.
    """
    mats = np.ascontiguousarray(mats, dtype=np.int64)
    primes = np.broadcast_to(np.asarray(primes, dtype=np.int64), (mats.shape[0],))
    primes = np.ascontiguousarray(primes)
    _check_primes(primes)
    return BACKENDS[backend or BACKEND]["charpoly"](mats, primes)


def iota_hits(cum, start, uniforms, grid, backend=None):
    """Count trials with iota_n < (n + 1) / (2|C|) at each grid point.

    ``cum`` is the row-wise cumulative kernel, ``uniforms`` a (trials, n_max)
    array of U[0,1) draws, ``grid`` an increasing int array within [0, n_max].
    """
    cum = np.ascontiguousarray(cum, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    grid = np.ascontiguousarray(grid, dtype=np.int64)
    return BACKENDS[backend or BACKEND]["iota"](cum, int(start), uniforms, grid)
