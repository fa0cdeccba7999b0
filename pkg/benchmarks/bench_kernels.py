"""Time each hot kernel under numba and under pure numpy.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Numba compile time is excluded (one warm-up call per kernel). The last row
is a whole toy OT session, which mixes kernel and protocol overhead.
"""
import argparse
import json
import time

import numpy as np

from qot import kernels
from qot.ecc import build_code, column_weight_for

rng = np.random.default_rng(12345)


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    n_hash, ell = 1 << 16, 256
    seed = rng.integers(0, 2, n_hash + ell - 1, dtype=np.uint8)
    x = rng.integers(0, 2, n_hash, dtype=np.uint8)
    yield f"toeplitz n={n_hash} l={ell}", lambda: kernels.toeplitz_mul(seed, x, ell)

    code = build_code(4096, seed=b"\x07" * 32)
    v = rng.integers(0, 2, code.n, dtype=np.uint8)
    yield "syndrome n=4096", lambda: kernels.sparse_syndrome(code.col_rows, v, code.q)

    err = (rng.random(code.n) < 0.006).astype(np.uint8)
    target = kernels.sparse_syndrome(code.col_rows, err, code.q)
    prior = np.full(code.n, np.log((1 - 0.006) / 0.006))
    yield "bp n=4096 a=0.006", lambda: kernels.bp_decode(code.chk_ptr, code.edge_var, code.n, prior, target, 50)

    small = build_code(1024, seed=b"\x08" * 32)
    H = small.H
    s = rng.integers(0, 2, small.q, dtype=np.uint8)
    order = rng.permutation(small.n).astype(np.int64)
    yield "gf2 eliminate 103x1024", lambda: kernels.gf2_eliminate(H, s, order)

    n, q = 2048, 205
    cw = column_weight_for(n, q)
    tb = rng.permutation(q).astype(np.int64)
    yield "peg n=2048", lambda: kernels.peg_columns(n, q, cw, -(-n * cw // q), tb)

    from qot import SecurityParams, run_ot
    p = SecurityParams.toy(1024, alpha=0.006)
    yield "ot session l_ot=1024", lambda: run_ot(b"a" * 32, b"b" * 32, 1, p, seed=1)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args()
    rows = []
    backends = ["numba", "numpy"] if kernels.HAVE_NUMBA else ["numpy"]
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases():
        t = {}
        for b in backends:
            kernels.set_backend(b)
            t[b] = best_of(fn, args.repeat)
        speed = t["numpy"] / t["numba"] if "numba" in t else float("nan")
        rows.append({"kernel": name, **{f"{b}_s": v for b, v in t.items()}, "speedup": speed})
        print(f"{name:<26}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
