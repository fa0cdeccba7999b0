"""Command-line entry point: ``qot <command> ...`` (or ``python3 -m qot``)."""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
import time

import numpy as np

from . import secparams as sp
from .rng import Drbg, normalize_seed
from .transport import SocketPipe, TransportError, connect, listen

EXIT_USAGE = 2
EXIT_FAIL = 1


def _endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def _hex_message(text: str) -> bytes:
    try:
        return bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError("messages are given as hex") from None


def _probability(text: str) -> float:
    v = float(text)
    if not 0 <= v < 0.5:
        raise argparse.ArgumentTypeError("must lie in [0, 0.5)")
    return v


def _target(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def _toy_params(args) -> sp.SecurityParams:
    return sp.SecurityParams.toy(lambda_ot=args.lambda_ot, alpha=args.alpha, vartheta=args.vartheta,
                                 m=args.m)


def _params_for_run(args) -> sp.SecurityParams:
    if args.toy:
        return _toy_params(args)
    p, _ = sp.optimize_params(args.target_delta, args.alpha, args.vartheta)
    return p


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, bytes):
        return o.hex()
    raise TypeError(type(o).__name__)


# -- commands -------------------------------------------------------------------

def cmd_calc_params(args) -> int:
    if args.toy:
        report = sp.params_report(_toy_params(args))
        report["feasible"] = True
        report["optimizer_seconds"] = 0.0
    else:
        t0 = time.perf_counter()
        try:
            p, _ = sp.optimize_params(args.target_delta, args.alpha, args.vartheta)
        except sp.Infeasible as exc:
            report = {"protocol": "qot", "target_delta": args.target_delta, "alpha": args.alpha,
                      "vartheta": args.vartheta, "feasible": False, "n_bb84": None,
                      "chi_model": sp.CHI_MODEL, "secure": False, "error": str(exc),
                      "optimizer_seconds": time.perf_counter() - t0}
        else:
            report = sp.params_report(p)
            report["feasible"] = True
            report["optimizer_seconds"] = time.perf_counter() - t0
    if args.format == "json":
        _dump(report)
    else:
        print(_report_table(report))
    return 0 if report["feasible"] else EXIT_FAIL


def _report_table(r: dict) -> str:
    lines = [f"alpha={r['alpha']}  vartheta={r['vartheta']}  target={r['target_delta']:g}"]
    if not r.get("feasible"):
        lines.append(f"infeasible: {r['error']}")
        return "\n".join(lines)
    for key, val in r["params"].items():
        lines.append(f"  {key:<14} {val}")
    lines.append(f"  {'N_BB84':<14} {r['n_bb84']:.4g}")
    lines.append(f"  {'T_acq @1MHz':<14} {sp.human_duration(r['t_acq_seconds'])}")
    for name, val in r["bounds"].items():
        lines.append(f"  bound[{name}]{'':<5} {val}")
    lines.append("  secure" if r["secure"] else "  NOT SECURE (toy or bound above target)")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    if not args.all and not args.protocol:
        print("bench: choose --all or --protocol", file=sys.stderr)
        return EXIT_USAGE
    if args.all:
        cols, text = sp.benchmark_table(args.target_delta, (args.alpha, args.vartheta))
        if args.format == "json":
            _dump(cols)
        else:
            print(text)
        return 0
    if args.protocol == "bckm21":
        row = sp.bench_bckm21(args.target_delta)
    else:
        row = sp.bench_abkk23(args.target_delta, rounds=3 if args.protocol == "abkk23-3" else 4)
    _dump(row.to_dict())
    return 0


def _insecure_guard(args, p) -> bool:
    if p.is_toy and not args.toy:
        print("refusing to run below secure sizes without --toy", file=sys.stderr)
        return False
    return True


def cmd_loopback(args) -> int:
    from .ot import run_ot

    if not args.toy:
        print("loopback runs need --toy (secure sizes take hours in simulation)", file=sys.stderr)
        return EXIT_USAGE
    p = _toy_params(args)
    root = Drbg(args.seed, "cli/loopback")
    ok, aborted, times = 0, 0, []
    for i in range(args.trials):
        r = root.spawn(f"trial/{i}")
        m0, m1, b = r.random_bytes(32), r.random_bytes(32), r.bit()
        t0 = time.perf_counter()
        res = run_ot(m0, m1, b, p, seed=r.random_bytes(32), transport=args.transport)
        times.append(time.perf_counter() - t0)
        ok += bool(res.ok and res.bob.message == (m0, m1)[b])
        aborted += res.alice.status != "END" or res.bob.status != "END"
    _dump({"trials": args.trials, "success": ok, "aborted": aborted,
           "success_rate": ok / args.trials, "mean_seconds": float(np.mean(times)),
           "alpha": p.alpha, "lambda_ot": p.lambda_ot, "transport": args.transport})
    return 0


def cmd_attack(args) -> int:
    from . import adversary

    if args.strategy == "binding":
        rep = adversary.attack_binding(args.param, args.trials, args.seed)
    elif args.strategy == "fake-family":
        rep = adversary.fake_seed_family(args.param, args.trials, seed=args.seed)
    else:
        rep = adversary.skip_measurement(args.param, args.trials, seed=args.seed)
    _dump(rep.to_dict())
    return 0


def cmd_run(args) -> int:
    from .session import run_session

    p = _params_for_run(args)
    if not _insecure_guard(args, p):
        return EXIT_USAGE
    if args.role == "alice":
        if args.m0 is None or args.m1 is None:
            print("alice needs --m0 and --m1", file=sys.stderr)
            return EXIT_USAGE
        inputs = {"m0": args.m0, "m1": args.m1}
    else:
        if args.b is None:
            print("bob needs --b", file=sys.stderr)
            return EXIT_USAGE
        inputs = {"b": args.b}

    def one(pipe, seed):
        out = run_session(args.role, pipe, p, inputs, seed=seed)
        rec = {"role": args.role, "status": out.status, "digest": out.digest.hex()}
        if args.role == "bob" and out.message is not None:
            rec["message"] = out.message.hex()
        return rec

    try:
        if args.connect:
            _dump(one(connect(*args.connect), args.seed))
            return 0
        srv = listen(*args.listen)
        print(f"listening on {srv.getsockname()[0]}:{srv.getsockname()[1]}", file=sys.stderr, flush=True)
        results, lock = [], threading.Lock()

        def serve(sock, i):
            seed = None if args.seed is None else f"{args.seed}/{i}"
            rec = one(SocketPipe(sock), seed if args.sessions > 1 else args.seed)
            with lock:
                results.append(rec)

        threads = []
        with srv:
            for i in range(args.sessions):
                sock, _ = srv.accept()
                t = threading.Thread(target=serve, args=(sock, i), daemon=True)
                t.start()
                threads.append(t)
        for t in threads:
            t.join()
        _dump(results[0] if len(results) == 1 else results)
        return 0
    except (TransportError, OSError) as exc:
        print(f"run: {exc}", file=sys.stderr)
        return EXIT_FAIL


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qot", description="Quantum OT from BB84 states: "
                                 "parameter calculator, simulator and attack harness.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, toy_default_lambda=4096):
        p.add_argument("--alpha", type=_probability, default=0.0, help="channel bit-flip rate")
        p.add_argument("--vartheta", type=_probability, default=0.0, help="multiphoton leak rate")
        p.add_argument("--target-delta", type=_target, default=sp.DEFAULT_TARGET)
        p.add_argument("--toy", action="store_true", help="accept insecure toy sizes")
        p.add_argument("--lambda-ot", type=int, default=toy_default_lambda, help="toy lambda_OT")
        p.add_argument("--m", type=int, default=128, help="toy ERE family size")
        p.add_argument("--seed", default=os.environ.get("QOT_SEED"), help="master seed (default $QOT_SEED)")

    p = sub.add_parser("calc-params", help="optimise security parameters")
    common(p)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_calc_params)

    p = sub.add_parser("bench", help="resource comparison table")
    p.add_argument("--all", action="store_true")
    p.add_argument("--protocol", choices=("bckm21", "abkk23-3", "abkk23-4"))
    p.add_argument("--target-delta", type=_target, default=sp.DEFAULT_TARGET)
    p.add_argument("--alpha", type=_probability, default=0.006)
    p.add_argument("--vartheta", type=_probability, default=0.001)
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("loopback", help="honest OT runs over an in-process transport")
    common(p)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--transport", choices=("loopback", "socket"), default="loopback")
    p.set_defaults(func=cmd_loopback)

    p = sub.add_parser("attack", help="Monte-Carlo cheating strategies")
    p.add_argument("strategy", choices=("binding", "fake-family", "skip"))
    p.add_argument("--param", type=int, required=True,
                   help="cheat count t, fake family count c, or skipped positions")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", default=os.environ.get("QOT_SEED"))
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("run", help="one party of an OT over TCP")
    common(p)
    p.add_argument("--role", choices=("alice", "bob"), required=True)
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--listen", type=_endpoint, metavar="HOST:PORT")
    where.add_argument("--connect", type=_endpoint, metavar="HOST:PORT")
    p.add_argument("--sessions", type=int, default=1, help="connections to serve when listening")
    p.add_argument("--m0", type=_hex_message)
    p.add_argument("--m1", type=_hex_message)
    p.add_argument("--b", type=int, choices=(0, 1))
    p.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "seed", None) is not None:
        args.seed = normalize_seed(args.seed)
    for name in ("trials", "sessions"):
        if getattr(args, name, 1) < 1:
            print(f"--{name} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (sp.DomainError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
