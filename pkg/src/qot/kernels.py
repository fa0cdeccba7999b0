"""Hot loops: Toeplitz GF(2) products, sparse syndromes and LDPC belief
propagation.

Each kernel exists twice, as a numba ``@njit`` loop and as a vectorised
numpy routine. The public dispatchers pick one according to ``BACKEND``,
which defaults to numba and falls back to numpy when numba is missing or
``QOT_PURE_NUMPY=1`` is set. Both paths compute identical results.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

PURE_NUMPY_ENV = "QOT_PURE_NUMPY"

if os.environ.get(PURE_NUMPY_ENV, "").strip().lower() in ("1", "true", "yes", "on"):
    BACKEND = "numpy"
else:
    BACKEND = "numba" if HAVE_NUMBA else "numpy"

_TANH_CLIP = 1.0 - 1e-15
_LLR_CLIP = 60.0


def set_backend(name: str) -> None:
    """Switch kernels at runtime (used by the benchmark and tests)."""
    global BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    BACKEND = name


# -- Toeplitz matrix-vector product over GF(2) ------------------------------
# T[i, j] = seed[i - j + m - 1], so row i of T is seed[i : i + m] reversed.

@njit(cache=True, nogil=True)
def _toeplitz_nb(seed, x, ell):
    m = x.shape[0]
    ones = np.empty(m, dtype=np.int64)
    cnt = 0
    for j in range(m):
        if x[j]:
            ones[cnt] = j
            cnt += 1
    out = np.zeros(ell, dtype=np.uint8)
    for i in range(ell):
        acc = 0
        base = i + m - 1
        for t in range(cnt):
            acc ^= seed[base - ones[t]]
        out[i] = acc
    return out


def _toeplitz_np(seed, x, ell):
    m = x.shape[0]
    cols = (m - 1) - np.flatnonzero(x)
    if cols.size == 0:
        return np.zeros(ell, dtype=np.uint8)
    win = sliding_window_view(seed, m)[:ell]
    return (win[:, cols].sum(axis=1, dtype=np.int64) & 1).astype(np.uint8)


def toeplitz_mul(seed: np.ndarray, x: np.ndarray, ell: int) -> np.ndarray:
    if BACKEND == "numba":
        return _toeplitz_nb(seed, x, ell)
    return _toeplitz_np(seed, x, ell)


# -- sparse syndrome ----------------------------------------------------------
# H is stored column-wise: col_rows[i] lists the check rows touching bit i.

@njit(cache=True, nogil=True)
def _syndrome_nb(col_rows, x, q):
    out = np.zeros(q, dtype=np.uint8)
    n, w = col_rows.shape
    for i in range(n):
        if x[i]:
            for t in range(w):
                out[col_rows[i, t]] ^= 1
    return out


def _syndrome_np(col_rows, x, q):
    hits = col_rows[x.astype(bool)].ravel()
    return (np.bincount(hits, minlength=q) & 1).astype(np.uint8)


def sparse_syndrome(col_rows: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    if BACKEND == "numba":
        return _syndrome_nb(col_rows, x, q)
    return _syndrome_np(col_rows, x, q)


# -- syndrome belief propagation ---------------------------------------------
# Edges are sorted by check: edge e joins check edge_chk[e] and bit edge_var[e],
# and check c owns edges chk_ptr[c]:chk_ptr[c+1]. We decode the error pattern e
# with prior P(e_i = 1) = p, subject to H e = s.

@njit(cache=True, nogil=True)
def _bp_nb(chk_ptr, edge_var, n, prior, target, max_iter):
    q = chk_ptr.shape[0] - 1
    n_edges = edge_var.shape[0]
    vc = np.empty(n_edges)
    cv = np.zeros(n_edges)
    for e in range(n_edges):
        vc[e] = prior[edge_var[e]]
    total = prior.copy()
    hard = np.zeros(n, dtype=np.uint8)
    prefix = np.empty(n_edges + 1)
    t = np.empty(n_edges)
    for it in range(max_iter):
        for e in range(n_edges):
            t[e] = np.tanh(0.5 * vc[e])
        for c in range(q):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            acc = 1.0
            for e in range(lo, hi):
                prefix[e] = acc
                acc *= t[e]
            acc = 1.0
            sgn = -1.0 if target[c] else 1.0
            for e in range(hi - 1, lo - 1, -1):
                v = prefix[e] * acc * sgn
                if v > _TANH_CLIP:
                    v = _TANH_CLIP
                elif v < -_TANH_CLIP:
                    v = -_TANH_CLIP
                cv[e] = 2.0 * np.arctanh(v)
                acc *= t[e]
        for i in range(n):
            total[i] = prior[i]
        for e in range(n_edges):
            total[edge_var[e]] += cv[e]
        for i in range(n):
            hard[i] = 1 if total[i] < 0.0 else 0
        ok = True
        for c in range(q):
            par = 0
            for e in range(chk_ptr[c], chk_ptr[c + 1]):
                par ^= hard[edge_var[e]]
            if par != target[c]:
                ok = False
                break
        if ok:
            return hard, True, it + 1, total
        for e in range(n_edges):
            v = total[edge_var[e]] - cv[e]
            if v > _LLR_CLIP:
                v = _LLR_CLIP
            elif v < -_LLR_CLIP:
                v = -_LLR_CLIP
            vc[e] = v
    return hard, False, max_iter, total


def _bp_np(chk_ptr, edge_var, n, prior, target, max_iter):
    q = chk_ptr.shape[0] - 1
    starts = chk_ptr[:-1]
    edge_chk = np.repeat(np.arange(q), np.diff(chk_ptr))
    chk_sign = np.where(target.astype(bool), -1.0, 1.0)
    vc = prior[edge_var].astype(np.float64)
    hard = np.zeros(n, dtype=np.uint8)
    total = prior.astype(np.float64)
    for it in range(max_iter):
        t = np.tanh(0.5 * vc)
        neg = t < 0
        mag = np.maximum(np.abs(t), 1e-300)
        logmag = np.log(mag)
        log_all = np.add.reduceat(logmag, starts)
        neg_all = np.add.reduceat(neg.astype(np.int64), starts) & 1
        excl = np.exp(log_all[edge_chk] - logmag)
        sign = np.where((neg_all[edge_chk] ^ neg) & 1, -1.0, 1.0) * chk_sign[edge_chk]
        v = np.clip(sign * excl, -_TANH_CLIP, _TANH_CLIP)
        cv = 2.0 * np.arctanh(v)
        total = prior + np.bincount(edge_var, weights=cv, minlength=n)
        hard = (total < 0).astype(np.uint8)
        par = np.add.reduceat(hard[edge_var].astype(np.int64), starts) & 1
        if np.array_equal(par, target):
            return hard, True, it + 1, total
        vc = np.clip(total[edge_var] - cv, -_LLR_CLIP, _LLR_CLIP)
    return hard, False, max_iter, total


def bp_decode(chk_ptr, edge_var, n, prior, target, max_iter=50):
    """Returns ``(error_estimate, converged, iterations, posterior_llr)``."""
    if BACKEND == "numba":
        hard, ok, it, total = _bp_nb(chk_ptr, edge_var, n, prior, target, max_iter)
    else:
        hard, ok, it, total = _bp_np(chk_ptr, edge_var, n, prior, target, max_iter)
    return hard, bool(ok), int(it), total


# -- GF(2) elimination in a caller-chosen column order -------------------------
# Used for ordered-statistics post-processing: the first independent columns
# in `order` become pivots. Returns the reduced matrix, the reduced syndrome,
# and pivot column per row (-1 for rows that became zero).

@njit(cache=True, nogil=True)
def _eliminate_nb(h, s, order):
    h = h.copy()
    s = s.copy()
    q, n = h.shape
    pivots = np.full(q, -1, dtype=np.int64)
    r = 0
    for idx in range(n):
        if r == q:
            break
        c = order[idx]
        sel = -1
        for i in range(r, q):
            if h[i, c]:
                sel = i
                break
        if sel < 0:
            continue
        if sel != r:
            for j in range(n):
                tmp = h[r, j]
                h[r, j] = h[sel, j]
                h[sel, j] = tmp
            tmp = s[r]
            s[r] = s[sel]
            s[sel] = tmp
        for i in range(q):
            if i != r and h[i, c]:
                for j in range(n):
                    h[i, j] ^= h[r, j]
                s[i] ^= s[r]
        pivots[r] = c
        r += 1
    return h, s, pivots


def _eliminate_np(h, s, order):
    h = h.copy()
    s = s.copy()
    q, n = h.shape
    pivots = np.full(q, -1, dtype=np.int64)
    r = 0
    for c in order:
        if r == q:
            break
        nz = np.flatnonzero(h[r:, c])
        if nz.size == 0:
            continue
        sel = r + nz[0]
        if sel != r:
            h[[r, sel]] = h[[sel, r]]
            s[[r, sel]] = s[[sel, r]]
        rows = np.flatnonzero(h[:, c])
        rows = rows[rows != r]
        h[rows] ^= h[r]
        s[rows] ^= s[r]
        pivots[r] = c
        r += 1
    return h, s, pivots


def gf2_eliminate(h, s, order):
    if BACKEND == "numba":
        return _eliminate_nb(h, s, order)
    return _eliminate_np(h, s, order)


# -- progressive edge growth ----------------------------------------------------
# Column j's k-th edge goes to the check farthest from j in the current graph.
# Ties go to the check sharing the fewest columns with j's checks so far (once
# the graph is dense every check is at distance one and this is what keeps
# columns apart), then lowest degree, then lowest rank in `tiebreak`. Checks at degree
# `maxdeg` are full. Distances are measured on the check-to-check graph
# (two checks adjacent when some column touches both); paths through column
# j itself only lead back to checks already reached, so this equals the usual
# bipartite search. Returns the (n, cw) column->rows table.

@njit(cache=True, inline="always")
def _peg_better(s1, d1, t1, s2, d2, t2):
    if s1 != s2:
        return s1 < s2
    if d1 != d2:
        return d1 < d2
    return t1 < t2


@njit(cache=True)
def _peg_nb(n, q, cw, maxdeg, tiebreak):
    words = (q + 63) // 64
    var_adj = np.full((n, cw), -1, dtype=np.int64)
    deg = np.zeros(q, dtype=np.int64)
    c2c = np.zeros((q, words), dtype=np.uint64)
    shared = np.zeros((q, q), dtype=np.uint16)
    reached = np.zeros(words, dtype=np.uint64)
    front = np.zeros(words, dtype=np.uint64)
    new = np.zeros(words, dtype=np.uint64)
    cand = np.zeros(words, dtype=np.uint64)
    one = np.uint64(1)
    for j in range(n):
        for k in range(cw):
            if k == 0:
                for w in range(words):
                    cand[w] = ~np.uint64(0)
            else:
                reached[:] = 0
                for t in range(k):
                    c = var_adj[j, t]
                    reached[c >> 6] |= one << np.uint64(c & 63)
                front[:] = reached
                while True:
                    new[:] = 0
                    for c in range(q):
                        if (front[c >> 6] >> np.uint64(c & 63)) & one:
                            for w in range(words):
                                new[w] |= c2c[c, w]
                    n_new = 0
                    n_all = 0
                    for w in range(words):
                        new[w] &= ~reached[w]
                    for c in range(q):
                        bit = (new[c >> 6] >> np.uint64(c & 63)) & one
                        n_new += bit
                        n_all += bit | ((reached[c >> 6] >> np.uint64(c & 63)) & one)
                    if n_new == 0:
                        for w in range(words):
                            cand[w] = ~reached[w]
                        break
                    if n_all == q:
                        cand[:] = new
                        break
                    for w in range(words):
                        reached[w] |= new[w]
                    front[:] = new
            best = -1
            best_s = 0
            for c in range(q):
                if (cand[c >> 6] >> np.uint64(c & 63)) & one and deg[c] < maxdeg:
                    sc = 0
                    for t in range(k):
                        sc += shared[c, var_adj[j, t]]
                    if best < 0 or _peg_better(sc, deg[c], tiebreak[c], best_s, deg[best], tiebreak[best]):
                        best, best_s = c, sc
            if best < 0:
                for c in range(q):
                    if deg[c] >= maxdeg:
                        continue
                    dup = False
                    sc = 0
                    for t in range(k):
                        if var_adj[j, t] == c:
                            dup = True
                        sc += shared[c, var_adj[j, t]]
                    if dup:
                        continue
                    if best < 0 or _peg_better(sc, deg[c], tiebreak[c], best_s, deg[best], tiebreak[best]):
                        best, best_s = c, sc
            for t in range(k):
                c = var_adj[j, t]
                c2c[c, best >> 6] |= one << np.uint64(best & 63)
                c2c[best, c >> 6] |= one << np.uint64(c & 63)
                shared[c, best] += 1
                shared[best, c] += 1
            var_adj[j, k] = best
            deg[best] += 1
    return var_adj


def _pick(cand, score, deg, tiebreak):
    idx = np.flatnonzero(cand)
    if idx.size == 0:
        return -1
    return int(idx[np.lexsort((tiebreak[idx], deg[idx], score[idx]))[0]])


def _peg_np(n, q, cw, maxdeg, tiebreak):
    var_adj = np.full((n, cw), -1, dtype=np.int64)
    deg = np.zeros(q, dtype=np.int64)
    shared = np.zeros((q, q), dtype=np.int64)
    for j in range(n):
        for k in range(cw):
            if k == 0:
                cand = np.ones(q, dtype=bool)
            else:
                reached = np.zeros(q, dtype=bool)
                reached[var_adj[j, :k]] = True
                front = reached.copy()
                while True:
                    new = (shared[front] > 0).any(axis=0) & ~reached
                    if not new.any():
                        cand = ~reached
                        break
                    if (reached | new).all():
                        cand = new
                        break
                    reached |= new
                    front = new
            mine = var_adj[j, :k]
            score = shared[:, mine].sum(axis=1)
            best = _pick(cand & (deg < maxdeg), score, deg, tiebreak)
            if best < 0:
                cand = deg < maxdeg
                cand[mine] = False
                best = _pick(cand, score, deg, tiebreak)
            shared[mine, best] += 1
            shared[best, mine] += 1
            var_adj[j, k] = best
            deg[best] += 1
    return var_adj


def peg_columns(n: int, q: int, cw: int, maxdeg: int, tiebreak: np.ndarray) -> np.ndarray:
    tiebreak = np.ascontiguousarray(tiebreak, dtype=np.int64)
    if BACKEND == "numba":
        return _peg_nb(n, q, cw, maxdeg, tiebreak)
    return _peg_np(n, q, cw, maxdeg, tiebreak)
