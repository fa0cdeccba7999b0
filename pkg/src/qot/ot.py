"""1-out-of-2 oblivious transfer from BB84 states and the ERE commitment,
plus distillation of several OTs from one session."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .bitops import pack
from .channel import Bb84Batch, ChannelModel, measure_batch, prepare_batch, transmit
from .commit import (FamilyCheat, ere_commit_committer, ere_commit_receiver,
                     ere_decommit_committer, ere_decommit_receiver, mismatch_rate)
from .ecc import DecodeFailure, build_code, decode, default_syndrome_len, syndrome
from .primitives import LAMBDA_PQS, prg_bytes, universal_hash
from .rng import Drbg
from .secparams import SecurityParams
from .session import run_pair, session_seeds
from .transport import Connection, MsgType, ProtocolError, Reader, Writer

MESSAGE_BYTES = LAMBDA_PQS // 8


class InsufficientIndices(ValueError):
    pass


@dataclass(frozen=True)
class IndexPartition:
    """Positions (in the reordered unchallenged set) keyed to message 0 and 1."""
    I0: np.ndarray
    I1: np.ndarray


@dataclass
class Strategy:
    """Receiver-side deviation for the attack harness: positions in
    ``skip`` are never measured, their outcomes are guessed."""
    skip: np.ndarray | None = None
    fake_families: tuple[int, ...] = ()


@dataclass
class PartyOutcome:
    status: str = "END"
    messages: tuple | None = None           # alice: (m0, m1)
    choice: int | None = None               # bob
    message: bytes | None = None            # bob: m_b
    decode_status: str | None = None
    key_lengths: tuple | None = None
    digest: bytes = b""
    frames: list | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class OtSessionResult:
    alice: PartyOutcome
    bob: PartyOutcome
    transcript_digest: bytes

    @property
    def ok(self) -> bool:
        return (self.alice.status == "END" and self.bob.status == "END"
                and self.bob.message == self.alice.messages[self.bob.choice])


def sample_challenge_set(universe: int, size: int, rng: Drbg) -> np.ndarray:
    if not 0 <= size <= universe:
        raise ValueError("size must lie in [0, universe]")
    return rng.subset(universe, size)


def code_for(params: SecurityParams, n: int):
    seed = hashlib.sha256(b"qot/ot-code" + params.digest()).digest()
    return build_code(n, default_syndrome_len(n), seed)


def keystream(seed_bits, x, nbytes: int) -> bytes:
    return prg_bytes(pack(universal_hash(seed_bits, x, LAMBDA_PQS)), nbytes)


def _xor(a: bytes, b: bytes) -> bytes:
    return (np.frombuffer(a, np.uint8) ^ np.frombuffer(b, np.uint8)).tobytes()


def encrypt_messages(x0, x1, s0, s1, m0: bytes, m1: bytes):
    """c_b = PRG(h(s_b, x_b)) XOR m_b. Returns ((c0, c1), (s0, s1))."""
    if len(m0) != len(m1):
        raise ValueError("messages must have equal length")
    for s, x in ((s0, x0), (s1, x1)):
        if np.size(s) != np.size(x) + LAMBDA_PQS - 1:
            raise ValueError("hash seed must be |x| + 255 bits")
    c0 = _xor(keystream(s0, x0, len(m0)), m0)
    c1 = _xor(keystream(s1, x1, len(m1)), m1)
    return (c0, c1), (s0, s1)


def decrypt_message(x, s, c: bytes) -> bytes:
    return _xor(keystream(s, x, len(c)), c)


def partition_for_multi_ot(theta, theta_hat, n_ot: int, v: int, choices=None) -> list[IndexPartition]:
    """Disjoint blocks of v/2 matched and v/2 mismatched positions. Block j
    puts its matched half under the receiver's choice ``choices[j]``."""
    matched = np.flatnonzero(np.asarray(theta) == np.asarray(theta_hat))
    other = np.flatnonzero(np.asarray(theta) != np.asarray(theta_hat))
    half = v // 2
    if n_ot < 1 or half < 1:
        raise ValueError("need n_ot >= 1 and v >= 2")
    if matched.size < n_ot * half or other.size < n_ot * half:
        raise InsufficientIndices(
            f"need {n_ot * half} matched and mismatched positions, have {matched.size} and {other.size}")
    choices = np.zeros(n_ot, dtype=np.uint8) if choices is None else np.asarray(choices, dtype=np.uint8)
    out = []
    for j in range(n_ot):
        good = matched[j * half:(j + 1) * half]
        bad = other[j * half:(j + 1) * half]
        out.append(IndexPartition(bad, good) if choices[j] else IndexPartition(good, bad))
    return out


def _check_params(params: SecurityParams, allow_toy: bool):
    if params.is_toy and not allow_toy:
        raise ValueError("toy parameters need an explicit toy acknowledgement")
    if params.w * params.k < 4 * params.lambda_ot:
        raise ValueError("ERE layer has fewer than 4*lambda_ot commit slots")


# -- shared front half: BB84 + commitment + test ---------------------------------------

def _alice_front(conn, params, model, rng):
    p = params
    n2 = 2 * p.lambda_ot
    batch = prepare_batch(n2, rng)
    conn.send(MsgType.OT_BB84_BATCH, transmit(batch, model, model.generator("ot/transmit")).to_bytes())
    r = Reader(conn.recv(MsgType.SURVIVORS))
    alive = r.bits(n2).astype(bool)
    r.done()
    x, th = batch.bit[alive], batch.basis[alive]
    n_s = x.size
    ere = ere_commit_receiver(conn, p, model, rng.spawn("ere"))
    if 2 * n_s > ere.n_commit:
        conn.abort("commit-slots", tag=MsgType.OT_ABORT)
    T = sample_challenge_set(n_s, n_s // 2, rng)
    mask = np.zeros(n_s, dtype=np.uint8)
    mask[T] = 1
    conn.send(MsgType.OT_CHALLENGE_SET, Writer().bits(mask).getvalue())
    opened = ere_decommit_receiver(conn, ere, np.stack([2 * T, 2 * T + 1], axis=1).ravel()).reshape(-1, 2)
    rate = mismatch_rate(x[T], opened[:, 0], th[T] == opened[:, 1])
    if rate > p.alpha + p.delta_ot:
        conn.abort("ot-check", tag=MsgType.OT_ABORT)
    rest = np.flatnonzero(mask == 0)
    conn.send(MsgType.OT_BASES, Writer().bits(th[rest]).getvalue())
    return x[rest], rate


def _bob_front(conn, params, model, rng, strategy):
    p = params
    n2 = 2 * p.lambda_ot
    batch = Bb84Batch.from_bytes(conn.recv(MsgType.OT_BB84_BATCH))
    if len(batch) != n2:
        raise ProtocolError(f"expected {n2} BB84 states")
    th_hat = rng.bits(n2)
    out = measure_batch(batch, th_hat, model, model.generator("ot/measure"))
    if strategy is not None and strategy.skip is not None:
        skip = np.asarray(strategy.skip, dtype=np.int64)
        guess = rng.spawn("guess").bits(skip.size).astype(np.int8)
        keep = out[skip] >= 0
        out[skip[keep]] = guess[keep]
    alive = out >= 0
    conn.send(MsgType.SURVIVORS, Writer().bits(alive.astype(np.uint8)).getvalue())
    x_hat, th_hat = out[alive].astype(np.uint8), th_hat[alive]
    n_s = x_hat.size
    nc = p.w * p.k
    if 2 * n_s > nc:
        raise ValueError("ERE layer has too few commit slots")
    bits = np.zeros(nc, dtype=np.uint8)
    bits[0:2 * n_s:2] = x_hat
    bits[1:2 * n_s:2] = th_hat
    cheat = FamilyCheat(tuple(strategy.fake_families)) if strategy and strategy.fake_families else None
    ere = ere_commit_committer(conn, bits, p, model, rng.spawn("ere"), cheat)
    r = Reader(conn.recv(MsgType.OT_CHALLENGE_SET))
    mask = r.bits(n_s)
    r.done()
    if int(mask.sum()) != n_s // 2:
        raise ProtocolError("challenge set has the wrong size")
    T = np.flatnonzero(mask)
    ere_decommit_committer(conn, ere, np.stack([2 * T, 2 * T + 1], axis=1).ravel(), rng.spawn("ere-open"))
    rest = np.flatnonzero(mask == 0)
    r = Reader(conn.recv(MsgType.OT_BASES))
    th = r.bits(rest.size)
    r.done()
    return x_hat[rest], th_hat[rest], th


def _bob_decode(params, x_hat_b, syn, rng):
    code = code_for(params, x_hat_b.size)
    res = decode(code, x_hat_b, syn, error_rate=max(params.alpha, 1e-3))
    if isinstance(res, DecodeFailure):
        return rng.bits(x_hat_b.size), "failed"
    return res, "ok"


# -- single OT --------------------------------------------------------------------------

def alice_ot(conn: Connection, m0: bytes, m1: bytes, params: SecurityParams,
             model: ChannelModel, rng: Drbg) -> PartyOutcome:
    x_rest, rate = _alice_front(conn, params, model, rng)
    r = Reader(conn.recv(MsgType.OT_PARTITION))
    in1 = r.bits(x_rest.size).astype(bool)
    r.done()
    I0, I1 = np.flatnonzero(~in1), np.flatnonzero(in1)
    if min(I0.size, I1.size) < 2:
        conn.abort("partition-size", tag=MsgType.OT_ABORT)
    x0, x1 = x_rest[I0], x_rest[I1]
    w = Writer().bits(syndrome(code_for(params, x0.size), x0)).bits(syndrome(code_for(params, x1.size), x1))
    conn.send(MsgType.OT_SYNDROMES, w.getvalue())
    s0 = rng.bits(x0.size + LAMBDA_PQS - 1)
    s1 = rng.bits(x1.size + LAMBDA_PQS - 1)
    (c0, c1), _ = encrypt_messages(x0, x1, s0, s1, m0, m1)
    conn.send(MsgType.OT_CIPHERTEXTS, Writer().bits(s0).blob(c0).bits(s1).blob(c1).getvalue())
    return PartyOutcome(messages=(m0, m1), key_lengths=(x0.size, x1.size), extra={"test_error_rate": rate})


def bob_ot(conn: Connection, b: int, params: SecurityParams, model: ChannelModel, rng: Drbg,
           strategy: Strategy | None = None) -> PartyOutcome:
    b = int(b)
    if b not in (0, 1):
        raise ValueError("choice bit must be 0 or 1")
    x_hat, th_hat, th = _bob_front(conn, params, model, rng, strategy)
    matched = th == th_hat
    in1 = matched if b == 1 else ~matched
    conn.send(MsgType.OT_PARTITION, Writer().bits(in1.astype(np.uint8)).getvalue())
    I = [np.flatnonzero(~in1), np.flatnonzero(in1)]
    r = Reader(conn.recv(MsgType.OT_SYNDROMES))
    syn = [r.bits(default_syndrome_len(I[0].size)), r.bits(default_syndrome_len(I[1].size))]
    r.done()
    r = Reader(conn.recv(MsgType.OT_CIPHERTEXTS))
    s0, c0, s1, c1 = r.bits(I[0].size + LAMBDA_PQS - 1), r.blob(), r.bits(I[1].size + LAMBDA_PQS - 1), r.blob()
    r.done()
    xb, status = _bob_decode(params, x_hat[I[b]], syn[b], rng.spawn("fallback"))
    msg = decrypt_message(xb, (s0, s1)[b], (c0, c1)[b])
    return PartyOutcome(choice=b, message=msg, decode_status=status, key_lengths=(I[0].size, I[1].size))


# -- multi OT ---------------------------------------------------------------------------

def effective_half_block(n_matched: int, n_other: int, n_ot: int, v: int) -> int:
    """v/2, shrunk when either basis pool cannot fill n_ot exact blocks."""
    return min(v // 2, n_matched // n_ot, n_other // n_ot)


def alice_multi_ot(conn: Connection, pairs, params: SecurityParams, model: ChannelModel,
                   rng: Drbg) -> PartyOutcome:
    n_ot = len(pairs)
    x_rest, rate = _alice_front(conn, params, model, rng)
    r = Reader(conn.recv(MsgType.OT_PARTITION))
    half = r.u32()
    blocks = r.u32s(2 * n_ot * half).reshape(n_ot, 2, half)
    r.done()
    flat = blocks.ravel()
    if half < 2 or flat.max(initial=0) >= x_rest.size or np.unique(flat).size != flat.size:
        conn.abort("partition-invalid", tag=MsgType.OT_ABORT)
    assign = rng.permutation(n_ot)            # message pair i goes to block assign[i]
    conn.send(MsgType.OT_ASSIGNMENT, Writer().u32s(assign).getvalue())
    code = code_for(params, half)
    w = Writer()
    for j in range(n_ot):
        for t in (0, 1):
            w.bits(syndrome(code, x_rest[blocks[j, t]]))
    conn.send(MsgType.OT_SYNDROMES, w.getvalue())
    w = Writer()
    for i, (m0, m1) in enumerate(pairs):
        j = int(assign[i])
        s0 = rng.bits(half + LAMBDA_PQS - 1)
        s1 = rng.bits(half + LAMBDA_PQS - 1)
        (c0, c1), _ = encrypt_messages(x_rest[blocks[j, 0]], x_rest[blocks[j, 1]], s0, s1, m0, m1)
        w.bits(s0).blob(c0).bits(s1).blob(c1)
    conn.send(MsgType.OT_CIPHERTEXTS, w.getvalue())
    return PartyOutcome(messages=tuple(pairs), extra={"assignment": assign, "half_block": half,
                                                      "test_error_rate": rate})


def bob_multi_ot(conn: Connection, choices, params: SecurityParams, model: ChannelModel, rng: Drbg,
                 v: int) -> PartyOutcome:
    choices = np.asarray(choices, dtype=np.uint8)
    n_ot = choices.size
    x_hat, th_hat, th = _bob_front(conn, params, model, rng, None)
    matched = int((th == th_hat).sum())
    half = effective_half_block(matched, th.size - matched, n_ot, v)
    if half < 2:
        conn.abort("insufficient-indices", tag=MsgType.OT_ABORT)
    parts = partition_for_multi_ot(th, th_hat, n_ot, 2 * half, choices)
    blocks = np.stack([np.stack([pt.I0, pt.I1]) for pt in parts])
    conn.send(MsgType.OT_PARTITION, Writer().u32(half).u32s(blocks.ravel()).getvalue())
    r = Reader(conn.recv(MsgType.OT_ASSIGNMENT))
    assign = r.u32s(n_ot)
    r.done()
    if np.unique(assign).size != n_ot or assign.max(initial=0) >= n_ot:
        raise ProtocolError("assignment is not a permutation")
    q = default_syndrome_len(half)
    r = Reader(conn.recv(MsgType.OT_SYNDROMES))
    syn = np.stack([r.bits(q) for _ in range(2 * n_ot)]).reshape(n_ot, 2, q)
    r.done()
    r = Reader(conn.recv(MsgType.OT_CIPHERTEXTS))
    cts = [(r.bits(half + LAMBDA_PQS - 1), r.blob(), r.bits(half + LAMBDA_PQS - 1), r.blob())
           for _ in range(n_ot)]
    r.done()
    got, statuses, picks = [], [], []
    for i in range(n_ot):
        j = int(assign[i])
        c = int(choices[j])
        xb, status = _bob_decode(params, x_hat[blocks[j, c]], syn[j, c], rng.spawn(f"fallback/{i}"))
        s0, c0, s1, c1 = cts[i]
        got.append(decrypt_message(xb, (s0, s1)[c], (c0, c1)[c]))
        statuses.append(status)
        picks.append(c)
    return PartyOutcome(choice=None, message=None, decode_status=",".join(statuses),
                        extra={"messages": got, "choices_by_pair": picks, "half_block": half})


# -- drivers ------------------------------------------------------------------------------

def run_ot(m0: bytes, m1: bytes, b: int, params: SecurityParams, model: ChannelModel | None = None,
           seed=None, transport: str = "loopback", strategy: Strategy | None = None,
           allow_toy: bool = True, record: bool = False) -> OtSessionResult:
    """Both parties of one OT over an in-process transport."""
    _check_params(params, allow_toy)
    ra, rb, ch = session_seeds(seed)
    if model is None:
        model = ChannelModel(params.alpha, 0.0, params.vartheta, ch)
    alice, bob = run_pair(lambda c: alice_ot(c, m0, m1, params, model, ra),
                          lambda c: bob_ot(c, b, params, model, rb, strategy), params, transport,
                          PartyOutcome, record)
    if bob.choice is None:
        bob.choice = int(b)
    return OtSessionResult(alice, bob, alice.digest)


def run_multi_ot(pairs, choices, params: SecurityParams, v: int, model: ChannelModel | None = None,
                 seed=None, transport: str = "loopback") -> OtSessionResult:
    _check_params(params, True)
    ra, rb, ch = session_seeds(seed)
    if model is None:
        model = ChannelModel(params.alpha, 0.0, params.vartheta, ch)
    alice, bob = run_pair(lambda c: alice_multi_ot(c, list(pairs), params, model, ra),
                          lambda c: bob_multi_ot(c, choices, params, model, rb, v), params, transport,
                          PartyOutcome)
    return OtSessionResult(alice, bob, alice.digest)
