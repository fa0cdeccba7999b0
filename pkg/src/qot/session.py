"""Run protocol parties over a transport: threads for in-process pairs,
a single role for real endpoints."""

from __future__ import annotations

import threading
from dataclasses import dataclass

from .rng import Drbg, default_seed
from .transport import (Connection, ProtocolAbort, TransportError, handshake,
                        loopback_pair, socket_pair)


@dataclass
class Failed:
    """What a party returns when it did not finish."""
    status: str
    digest: bytes = b""
    frames: list | None = None


def make_pipes(kind: str):
    if kind == "loopback":
        return loopback_pair()
    if kind == "socket":
        return socket_pair()
    raise ValueError(f"unknown transport {kind!r}")


def session_seeds(seed):
    """Independent randomness for both parties and the channel, all derived
    from one master seed (``QOT_SEED`` when none is given)."""
    if seed is None:
        seed = default_seed()
    master = Drbg(seed, "qot/session")
    return master.spawn("alice"), master.spawn("bob"), master.random_bytes(32)


def drive(fn, conn: Connection, params, failed=Failed):
    """Handshake, run ``fn(conn)``, and turn aborts into a status value.

    ``params=None`` skips the handshake (bare sub-protocol runs in tests).
    """
    try:
        if params is not None:
            handshake(conn, params.digest())
        out = fn(conn)
    except ProtocolAbort as exc:
        out = failed(status=f"ABORT:{exc.stage}")
    except TransportError as exc:
        out = failed(status=f"ERROR:{exc}")
    finally:
        conn.close()
    try:
        out.digest = conn.digest()
        if conn.frames is not None:
            out.frames = conn.frames
    except AttributeError:
        pass
    return out


def run_pair(alice_fn, bob_fn, params, transport="loopback", failed=Failed, record=False):
    """Run two party callables ``f(conn)`` on their own threads. With
    ``record`` each result also carries the list of frames it saw."""
    pa, pb = make_pipes(transport)
    box: dict = {}

    def go(key, fn, pipe):
        try:
            box[key] = drive(fn, Connection(pipe, key, record), params, failed)
        except BaseException as exc:  # surfaced in the caller's thread below
            box[key] = exc

    threads = [threading.Thread(target=go, args=("alice", alice_fn, pa)),
               threading.Thread(target=go, args=("bob", bob_fn, pb))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for key in ("alice", "bob"):
        if isinstance(box[key], BaseException):
            raise box[key]
    return box["alice"], box["bob"]


def run_session(role: str, pipe, params, inputs: dict, model=None, seed=None, strategy=None):
    """Play one side of an OT over ``pipe`` (e.g. a connected socket).

    ``inputs`` holds ``m0``/``m1`` for alice and ``b`` for bob.
    """
    from .channel import ChannelModel
    from .ot import PartyOutcome, alice_ot, bob_ot

    ra, rb, ch = session_seeds(seed)
    if model is None:
        model = ChannelModel(params.alpha, 0.0, params.vartheta, ch)
    conn = Connection(pipe, role)
    if role == "alice":
        fn = lambda c: alice_ot(c, inputs["m0"], inputs["m1"], params, model, ra)
    elif role == "bob":
        fn = lambda c: bob_ot(c, inputs["b"], params, model, rb, strategy)
    else:
        raise ValueError("role must be 'alice' or 'bob'")
    return drive(fn, conn, params, PartyOutcome)
