"""Syndrome-based error correction with seeded LDPC codes.

Only ``(n, q, seed)`` ever needs to travel: both sides rebuild the same
parity-check matrix. Decoding works on the difference pattern ``e`` with
``H e = target XOR H y`` and returns ``y XOR e``.
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .bitops import as_bits, pack

COLUMN_WEIGHT = 4
SYNDROME_FRACTION = 0.1
SMALL_N = 24
BP_ITERATIONS = 50
OSD_PAIR_WIDTH = 64
OSD_FULL = 16       # free sets this small are enumerated completely (exact ML)
# extra OSD passes over reliability orders perturbed by Gaussian noise of
# OSD_NOISE * std(llr); the noise is seeded by the syndrome, so decoding stays
# deterministic
OSD_RESTARTS = 16
OSD_NOISE = 0.3
_SEARCH_BUDGET = 1 << 21


def default_syndrome_len(n: int) -> int:
    return max(1, math.ceil(SYNDROME_FRACTION * n))


@dataclass(frozen=True)
class DecodeFailure:
    """Returned (not raised) when no acceptable correction was found."""
    reason: str
    iterations: int = 0

    def __bool__(self):
        return False


@dataclass(frozen=True, eq=False)
class LinearCode:
    n: int
    q: int
    seed: bytes
    col_rows: np.ndarray = field(repr=False)
    chk_ptr: np.ndarray = field(repr=False)
    edge_var: np.ndarray = field(repr=False)

    @property
    def column_weight(self) -> int:
        return self.col_rows.shape[1]

    @functools.cached_property
    def H(self) -> np.ndarray:
        h = np.zeros((self.q, self.n), dtype=np.uint8)
        h[self.col_rows, np.arange(self.n)[:, None]] = 1
        h.flags.writeable = False
        return h

    def row_weights(self) -> np.ndarray:
        return np.diff(self.chk_ptr)

    def column_syndromes(self) -> list[int]:
        """Each column of H as an integer (row 0 is the most significant bit)."""
        out = []
        for rows in self.col_rows:
            v = 0
            for r in rows:
                v |= 1 << (self.q - 1 - int(r))
            out.append(v)
        return out


def _code_rng(n, q, seed):
    h = hashlib.sha256(b"qot/ldpc\x00" + seed + n.to_bytes(8, "big") + q.to_bytes(8, "big")).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(h, "big")))


def column_weight_for(n: int, q: int) -> int:
    """3 for the (3,6) shape n = 2q, otherwise 4.

    Tiny syndromes get lighter columns: with weight close to q most columns
    coincide and the rank collapses.
    """
    return min(3 if n == 2 * q else COLUMN_WEIGHT, max(1, (q - 1) // 2))


@functools.lru_cache(maxsize=64)
def build_code(n: int, q: int | None = None, seed: bytes = bytes(32)) -> LinearCode:
    """Progressive-edge-growth LDPC code. Columns have equal weight, row
    weights differ by at most one, and the seed only fixes tie-breaking."""
    if q is None:
        q = default_syndrome_len(n)
    if not 1 <= q < n:
        raise ValueError(f"need 1 <= q < n, got n={n}, q={q}")
    seed = bytes(seed)
    rng = _code_rng(n, q, seed)
    cw = column_weight_for(n, q)
    maxdeg = -(-n * cw // q)
    cols = kernels.peg_columns(n, q, cw, maxdeg, rng.permutation(q))
    cols.sort(axis=1)
    flat = cols.ravel()
    order = np.argsort(flat, kind="stable")
    edge_var = np.repeat(np.arange(n, dtype=np.int64), cw)[order]
    chk_ptr = np.zeros(q + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=q), out=chk_ptr[1:])
    for a in (cols, edge_var, chk_ptr):
        a.flags.writeable = False
    return LinearCode(n, q, seed, cols, chk_ptr, edge_var)


def syndrome(code: LinearCode, x) -> np.ndarray:
    x = as_bits(x, code.n)
    return kernels.sparse_syndrome(code.col_rows, x, code.q)


def decode(code: LinearCode, y, target_syndrome, max_flips: int | None = None,
           error_rate: float | None = None, method: str = "auto"):
    """Find ``x`` near ``y`` with ``syndrome(x) == target_syndrome``.

    Returns the corrected bits, or a :class:`DecodeFailure` value. Codes with
    ``n <= 24`` are decoded exactly by a weight-ordered search (so the result
    is a minimum-weight coset leader). Larger codes run belief propagation
    with prior ``error_rate`` and, if BP does not converge, ordered-statistics
    decoding over the BP reliabilities.
    """
    if method not in ("auto", "search", "bp"):
        raise ValueError(f"unknown decode method {method!r}")
    y = as_bits(y, code.n)
    target = as_bits(target_syndrome, code.q)
    if max_flips is None:
        max_flips = code.n
    diff = target ^ syndrome(code, y)
    if not diff.any():
        return y.copy()
    if method == "auto":
        method = "search" if code.n <= SMALL_N else "bp"
    if method == "search":
        e = _search(code, diff, max_flips)
        if isinstance(e, DecodeFailure):
            return e
    else:
        p = 0.01 if error_rate is None else error_rate
        p = min(max(p, 1e-4), 0.4)
        prior = np.full(code.n, math.log((1 - p) / p))
        e, ok, it, llr = kernels.bp_decode(code.chk_ptr, code.edge_var, code.n, prior, diff, BP_ITERATIONS)
        if not ok:
            e = None
        if e is None or code.n <= SMALL_N:
            # tiny codes: OSD is exhaustive, so let it overrule a heavier BP answer
            for alt in _osd_passes(code, diff, llr, 1 if ok else 1 + OSD_RESTARTS):
                if alt is not None and (e is None or alt.sum() < e.sum()):
                    e = alt
        if e is None:
            return DecodeFailure("belief propagation and OSD found no solution", it)
        if int(e.sum()) > max_flips:
            return DecodeFailure("correction heavier than max_flips", it)
    return y ^ e


def _osd_passes(code, diff, llr, passes):
    yield _osd(code, diff, np.argsort(llr, kind="stable"))
    if passes > 1:
        rng = np.random.default_rng(np.frombuffer(hashlib.sha256(pack(diff)).digest(), np.uint32))
        sd = float(np.std(llr)) or 1.0
        for _ in range(passes - 1):
            yield _osd(code, diff, np.argsort(llr + rng.normal(0.0, OSD_NOISE * sd, llr.size), kind="stable"))


def _osd(code, diff, order):
    """Ordered-statistics post-processing after BP fails to converge.

    Columns are taken in ``order`` (least reliable first); the first
    independent ones form the pivot set. We keep the lightest solution among
    order 0, every single non-pivot flip, and pairs among the
    ``OSD_PAIR_WIDTH`` least reliable non-pivots. When at most ``OSD_FULL``
    columns are free every assignment is tried, which is exact.
    """
    order = np.asarray(order, dtype=np.int64)
    red, s2, piv = kernels.gf2_eliminate(code.H, diff.astype(np.uint8), order)
    rank = int((piv >= 0).sum())
    if s2[rank:].any():
        return None
    piv_cols = piv[:rank]
    is_piv = np.zeros(code.n, dtype=bool)
    is_piv[piv_cols] = True
    free = order[~is_piv[order]]
    base = s2[:rank].astype(np.int64)
    cols = red[:rank][:, free].astype(np.int64)

    best_w = int(base.sum())
    best_flip: tuple = ()
    if free.size <= OSD_FULL:
        pats = ((np.arange(1 << free.size)[:, None] >> np.arange(free.size)) & 1).astype(np.int64)
        w = pats.sum(axis=1) + ((pats @ cols.T) % 2 ^ base).sum(axis=1)
        t = int(np.argmin(w))
        if w[t] < best_w:
            best_w, best_flip = int(w[t]), tuple(np.flatnonzero(pats[t]).tolist())
        return _osd_apply(code, free, piv_cols, base, cols, best_flip)
    w1 = 1 + (cols ^ base[:, None]).sum(axis=0)
    j = int(np.argmin(w1)) if w1.size else -1
    if j >= 0 and w1[j] < best_w:
        best_w, best_flip = int(w1[j]), (j,)
    k = min(OSD_PAIR_WIDTH, free.size)
    if k >= 2:
        a, b = np.triu_indices(k, 1)
        w2 = 2 + (cols[:, a] ^ cols[:, b] ^ base[:, None]).sum(axis=0)
        t = int(np.argmin(w2))
        if w2[t] < best_w:
            best_w, best_flip = int(w2[t]), (int(a[t]), int(b[t]))
    return _osd_apply(code, free, piv_cols, base, cols, best_flip)


def _osd_apply(code, free, piv_cols, base, cols, best_flip):
    e = np.zeros(code.n, dtype=np.uint8)
    piv_bits = base.copy()
    for f in best_flip:
        e[free[f]] = 1
        piv_bits ^= cols[:, f]
    e[piv_cols] = piv_bits.astype(np.uint8)
    return e


def _search(code, diff, max_flips):
    cols = code.column_syndromes()
    want = 0
    for b in diff.tolist():
        want = (want << 1) | b
    spent = 0
    for w in range(1, min(max_flips, code.n) + 1):
        for combo in combinations(range(code.n), w):
            acc = 0
            for i in combo:
                acc ^= cols[i]
            if acc == want:
                e = np.zeros(code.n, dtype=np.uint8)
                e[list(combo)] = 1
                return e
            spent += 1
            if spent > _SEARCH_BUDGET:
                return DecodeFailure("search budget exhausted", w)
    return DecodeFailure("no correction within max_flips", max_flips)
