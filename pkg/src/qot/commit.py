"""Equivocal commitments over Naor's scheme, and the equivocal, relaxed
extractable (ERE) commitment built from them.

Everything is batched: one message per protocol step carries all parallel
instances. Naor strings are rows of a ``(N, 96)`` uint8 array, seeds rows of
``(N, 32)``. The four seeds of one EqCommitment sit in slot order
``2*gamma + delta`` (p00, p01, p10, p11).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .bitops import pack
from .channel import ChannelModel, measure_batch, prepare_batch, transmit, Bb84Batch
from .ecc import build_code, default_syndrome_len, syndrome
from .primitives import LAMBDA_PQS, SEED_BYTES, prg_bytes, universal_hash
from .rng import Drbg
from .secparams import SecurityParams
from .transport import Connection, MsgType, ProtocolError, Reader, Writer

NAOR_LAMBDA = LAMBDA_PQS
NAOR_BYTES = 3 * NAOR_LAMBDA // 8


# -- Naor, vectorised ----------------------------------------------------------

def naor_strings(seeds) -> np.ndarray:
    """W(r) for every seed row."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint8).reshape(-1, SEED_BYTES)
    raw = seeds.tobytes()
    out = b"".join(hashlib.shake_256(raw[i:i + SEED_BYTES]).digest(NAOR_BYTES)
                   for i in range(0, len(raw), SEED_BYTES))
    return np.frombuffer(out, dtype=np.uint8).reshape(-1, NAOR_BYTES)


def naor_payloads(keys, seeds, bits) -> np.ndarray:
    """``W(seed) XOR bit*key`` row by row; ``keys`` broadcast over extra axes."""
    seeds = np.asarray(seeds, dtype=np.uint8)
    lead = seeds.shape[:-1]
    w = naor_strings(seeds).reshape(*lead, NAOR_BYTES)
    bits = np.asarray(bits, dtype=np.uint8)
    return w ^ (np.asarray(keys, dtype=np.uint8) * bits[..., None])


def naor_open_many(keys, payloads, seeds) -> np.ndarray:
    """Opened bit per row, or -1 where the seed opens neither value."""
    w = naor_strings(seeds).reshape(np.shape(payloads))
    is0 = (payloads == w).all(axis=-1)
    is1 = (payloads == (w ^ keys)).all(axis=-1)
    return np.where(is0, 0, np.where(is1, 1, -1)).astype(np.int8)


# -- EqCommitment ----------------------------------------------------------------

@dataclass(frozen=True)
class EqSeedQuad:
    p00: bytes
    p01: bytes
    p10: bytes
    p11: bytes

    def __post_init__(self):
        seen = [self.p00, self.p01, self.p10, self.p11]
        if any(len(s) != SEED_BYTES for s in seen):
            raise ValueError("each seed must be 32 bytes")

    @classmethod
    def random(cls, rng: Drbg) -> "EqSeedQuad":
        return cls(*(rng.random_bytes(SEED_BYTES) for _ in range(4)))

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.p00 + self.p01 + self.p10 + self.p11, dtype=np.uint8).reshape(4, SEED_BYTES)

    def seed(self, gamma: int, delta: int) -> bytes:
        return (self.p00, self.p01, self.p10, self.p11)[2 * gamma + delta]


def committed_slots(u, equivocate=None, guess=None, flip=None):
    """Bit held in each of the four slots.

    Honest: slots (gamma, 0) and (gamma, 1) both hold ``u[gamma]``. Where
    ``equivocate`` is set, the pair the committer expects to stay closed
    (``1 - guess``) holds ``(flip, 1 - flip)`` instead.
    """
    u = np.asarray(u, dtype=np.uint8)
    c = np.repeat(u, 2, axis=1)
    if equivocate is not None:
        idx = np.flatnonzero(equivocate)
        other = 1 - guess[idx]
        c[idx, 2 * other] = flip[idx]
        c[idx, 2 * other + 1] = 1 - flip[idx]
    return c


def check_eq_open(keys, payloads, gamma, open_bits, open_seeds) -> np.ndarray:
    """Receiver's challenge check: both slots of pair gamma open, to the same
    claimed bit. Returns a per-instance ok mask."""
    n = gamma.size
    rows = np.arange(n)
    sel = payloads[rows[:, None], 2 * gamma[:, None] + np.arange(2)]
    got = naor_open_many(keys[:, None, :], sel, open_seeds)
    return (got[:, 0] == open_bits[:, 0]) & (got[:, 1] == open_bits[:, 1]) & (open_bits[:, 0] == open_bits[:, 1])


def check_eq_decommit(keys, payloads, gamma, e, b, delta, seeds) -> np.ndarray:
    """Opening of slot (1 - gamma, delta) must give b XOR e."""
    slot = 2 * (1 - gamma) + delta
    sel = payloads[np.arange(gamma.size), slot]
    got = naor_open_many(keys, sel, seeds)
    return got == (b ^ e)


@dataclass
class EqCommitTranscript:
    """One EqCommitment as both parties end up seeing it."""
    u0: int
    u1: int
    c: np.ndarray          # (4, 96) Naor payloads, slot 2*gamma + delta
    key: np.ndarray
    gamma: int
    e: int
    slots: np.ndarray      # bit held by each slot (committer side)
    seeds: EqSeedQuad
    aborted: str | None = None
    delta: int | None = None
    opened_bit: int | None = None


def eq_commit(b: int, seeds: EqSeedQuad, committer_rng: Drbg, receiver_rng: Drbg,
              equivocate_guess: int | None = None) -> EqCommitTranscript:
    """Single in-process EqCommitment (commit phase).

    With ``equivocate_guess`` set, the committer bets the challenge will be
    that value and makes the other pair openable to both bits.
    """
    key = np.frombuffer(receiver_rng.random_bytes(NAOR_BYTES), dtype=np.uint8)
    u = committer_rng.bits(2).reshape(1, 2)
    if equivocate_guess is None:
        slots = committed_slots(u)[0]
    else:
        flip = committer_rng.bits(1)
        slots = committed_slots(u, np.array([True]), np.array([equivocate_guess]), flip)[0]
    quad = seeds.as_array()
    c = naor_payloads(key, quad, slots)
    gamma = receiver_rng.bit()
    open_bits = slots[2 * gamma:2 * gamma + 2].reshape(1, 2)
    ok = check_eq_open(key[None], c[None], np.array([gamma]), open_bits,
                       quad[2 * gamma:2 * gamma + 2][None])[0]
    # with an equivocating pair "u^(1-gamma)" is only defined slot-wise; use slot 0
    e = int(b) ^ int(slots[2 * (1 - gamma)])
    return EqCommitTranscript(int(u[0, 0]), int(u[0, 1]), c, key, gamma, e, slots, seeds,
                              aborted=None if ok else "challenge-check")


def eq_decommit(tr: EqCommitTranscript, b: int, delta: int, seed: bytes) -> tuple[bool, str | None]:
    """Receiver's decommit check. Returns (accepted, failed_check)."""
    seed_arr = np.frombuffer(seed, dtype=np.uint8)[None]
    got = int(naor_open_many(tr.key[None], tr.c[2 * (1 - tr.gamma) + delta][None], seed_arr)[0])
    if got < 0:
        return False, "naor-verify"
    if got != (int(b) ^ tr.e):
        return False, "mask-check"
    tr.delta, tr.opened_bit = delta, int(b)
    return True, None


def equivocal_delta(tr: EqCommitTranscript, b: int) -> int | None:
    """A delta whose opening reads as ``b``, if one exists."""
    for d in (0, 1):
        if tr.slots[2 * (1 - tr.gamma) + d] == (int(b) ^ tr.e):
            return d
    return None


# batched, over a connection

@dataclass
class EqCommitterState:
    bits: np.ndarray
    u: np.ndarray
    slots: np.ndarray
    seeds: np.ndarray      # (N, 4, 32)
    keys: np.ndarray
    gamma: np.ndarray
    e: np.ndarray


@dataclass
class EqReceiverState:
    keys: np.ndarray
    payloads: np.ndarray   # (N, 4, 96)
    gamma: np.ndarray
    e: np.ndarray


def eq_commit_send(conn: Connection, bits, seeds, rng: Drbg) -> EqCommitterState:
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.size
    r = Reader(conn.recv(MsgType.NAOR_KEY))
    keys = r.matrix(n, NAOR_BYTES)
    r.done()
    u = rng.bits(2 * n).reshape(n, 2)
    slots = committed_slots(u)
    payloads = naor_payloads(keys[:, None, :], seeds, slots)
    conn.send(MsgType.NAOR_PAYLOAD, Writer().matrix(payloads.reshape(-1, NAOR_BYTES)).getvalue())
    r = Reader(conn.recv(MsgType.EQ_CHALLENGE))
    gamma = r.bits(n)
    r.done()
    rows = np.arange(n)
    pair = 2 * gamma[:, None] + np.arange(2)
    w = Writer().bits(slots[rows[:, None], pair].ravel())
    w.matrix(seeds[rows[:, None], pair].reshape(-1, SEED_BYTES))
    conn.send(MsgType.EQ_OPEN, w.getvalue())
    e = bits ^ u[rows, 1 - gamma]
    conn.send(MsgType.EQ_MASK, Writer().bits(e).getvalue())
    return EqCommitterState(bits, u, slots, np.asarray(seeds), keys, gamma, e)


def eq_commit_recv(conn: Connection, n: int, rng: Drbg) -> EqReceiverState:
    keys = np.frombuffer(rng.random_bytes(n * NAOR_BYTES), dtype=np.uint8).reshape(n, NAOR_BYTES)
    conn.send(MsgType.NAOR_KEY, Writer().matrix(keys).getvalue())
    r = Reader(conn.recv(MsgType.NAOR_PAYLOAD))
    payloads = r.matrix(4 * n, NAOR_BYTES).reshape(n, 4, NAOR_BYTES)
    r.done()
    gamma = rng.bits(n)
    conn.send(MsgType.EQ_CHALLENGE, Writer().bits(gamma).getvalue())
    r = Reader(conn.recv(MsgType.EQ_OPEN))
    open_bits = r.bits(2 * n).reshape(n, 2)
    open_seeds = r.matrix(2 * n, SEED_BYTES).reshape(n, 2, SEED_BYTES)
    r.done()
    ok = check_eq_open(keys, payloads, gamma, open_bits, open_seeds)
    if not ok.all():
        conn.abort("challenge-check", int(np.flatnonzero(~ok)[0]))
    r = Reader(conn.recv(MsgType.EQ_MASK))
    e = r.bits(n)
    r.done()
    return EqReceiverState(keys, payloads, gamma, e)


def eq_decommit_send(conn: Connection, st: EqCommitterState, indices, rng: Drbg) -> None:
    idx = np.asarray(indices, dtype=np.int64)
    delta = rng.bits(idx.size)
    other = 1 - st.gamma[idx]
    seeds = st.seeds[idx, 2 * other + delta]
    w = Writer().u32s(idx).bits(st.bits[idx]).bits(delta).matrix(seeds)
    conn.send(MsgType.EQ_DECOMMIT, w.getvalue())


def eq_decommit_recv(conn: Connection, st: EqReceiverState, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64)
    r = Reader(conn.recv(MsgType.EQ_DECOMMIT))
    got_idx = r.u32s(idx.size)
    b = r.bits(idx.size)
    delta = r.bits(idx.size)
    seeds = r.matrix(idx.size, SEED_BYTES)
    r.done()
    if not np.array_equal(got_idx, idx):
        raise ProtocolError("decommitment for unexpected indices")
    ok = check_eq_decommit(st.keys[idx], st.payloads[idx], st.gamma[idx], st.e[idx], b, delta, seeds)
    if not ok.all():
        conn.abort("eq-decommit", int(idx[np.flatnonzero(~ok)[0]]))
    return b


# -- ERE-Commitment ----------------------------------------------------------------

def seed_slots(r: int, q: int) -> tuple[tuple[int, int], ...]:
    """(family, seed index) feeding the q-th commitment of pair r, in slot
    order p00, p01, p10, p11."""
    return ((2 * r, 2 * q), (2 * r, 2 * q + 1), (2 * r + 1, 2 * q), (2 * r + 1, 2 * q + 1))


def family_seed_index(k: int, w: int) -> np.ndarray:
    """(k*w, 4, 2) table of :func:`seed_slots` for every commitment."""
    r, q = np.divmod(np.arange(k * w), w)
    fam = np.stack([2 * r, 2 * r, 2 * r + 1, 2 * r + 1], axis=1)
    sd = np.stack([2 * q, 2 * q + 1, 2 * q, 2 * q + 1], axis=1)
    return np.stack([fam, sd], axis=2)


def expand_family(s_j: bytes, w: int) -> np.ndarray:
    """PRG(s_j) split into 2w seeds."""
    return np.frombuffer(prg_bytes(s_j, 2 * w * SEED_BYTES), dtype=np.uint8).reshape(2 * w, SEED_BYTES)


def family_seed(r_j, x_tilde) -> bytes:
    return pack(universal_hash(r_j, x_tilde, LAMBDA_PQS))


def ere_code(params: SecurityParams):
    seed = hashlib.sha256(b"qot/ere-code" + params.digest()).digest()
    return build_code(params.m, min(params.q_ere, params.m - 1), seed)


def canonical_families(rest: np.ndarray, k: int, m: int) -> np.ndarray:
    return rest[: 2 * k * m].reshape(2 * k, m)


def mismatch_rate(a, b, matched) -> float:
    matched = np.asarray(matched, dtype=bool)
    if not matched.any():
        return 0.0
    return float(np.mean(np.asarray(a)[matched] != np.asarray(b)[matched]))


@dataclass
class EreSession:
    role: str
    params: SecurityParams
    phase: str = "init"
    survivors: np.ndarray | None = None       # original indices kept after loss
    x: np.ndarray | None = None               # committer's BB84 bits (survivor order)
    theta: np.ndarray | None = None
    x_hat: np.ndarray | None = None           # receiver's outcomes
    theta_hat: np.ndarray | None = None
    challenge: np.ndarray | None = None       # E
    rest: np.ndarray | None = None            # complement of E, ascending
    families: np.ndarray | None = None        # (2k, m) member sets M_j
    r_seeds: np.ndarray | None = None         # (2k, m + 255) hash seeds
    family_seeds: dict = field(default_factory=dict)   # j -> (2w, 32)
    syndromes: np.ndarray | None = None
    gammas: np.ndarray | None = None
    keys: np.ndarray | None = None
    payloads: np.ndarray | None = None        # (wk, 4, 96)
    e: np.ndarray | None = None
    bits: np.ndarray | None = None
    u: np.ndarray | None = None
    slots: np.ndarray | None = None
    measurement_commits: object = None        # step-3 EqCommitment state
    opened: dict = field(default_factory=dict)

    @property
    def n_commit(self) -> int:
        return self.params.w * self.params.k

    def seed_slots(self, r: int, q: int):
        return seed_slots(r, q)


@dataclass
class FamilyCheat:
    """Committer-side deviation: families listed in ``fake`` get random
    seeds instead of PRG(h(r_j, x~_j))."""
    fake: tuple[int, ...] = ()


def ere_commit_committer(conn: Connection, bits, params: SecurityParams, model: ChannelModel,
                         rng: Drbg, cheat: FamilyCheat | None = None) -> EreSession:
    """Committer C: BB84 sender, then seed families and k*w EqCommitments."""
    p = params
    s = EreSession("committer", p)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != s.n_commit:
        raise ValueError(f"need exactly w*k = {s.n_commit} bits, got {bits.size}")
    s.bits = bits
    n4 = 4 * p.lambda_ex

    # steps 1-2
    batch = prepare_batch(n4, rng)
    conn.send(MsgType.ERE_BB84_BATCH, transmit(batch, model, model.generator("ere/transmit")).to_bytes())
    r = Reader(conn.recv(MsgType.SURVIVORS))
    alive = r.bits(n4).astype(bool)
    r.done()
    s.survivors = np.flatnonzero(alive)
    s.x, s.theta = batch.bit[alive], batch.basis[alive]
    n_s = s.survivors.size
    if n_s - n_s // 2 < 2 * p.k * p.m:
        conn.abort("insufficient-survivors")

    # step 3: receiver commits to (x^_i, theta^_i)
    st = eq_commit_recv(conn, 2 * n_s, rng.spawn("eq-receiver"))
    s.measurement_commits = st

    # steps 4-6
    E = rng.subset(n_s, n_s // 2)
    mask = np.zeros(n_s, dtype=np.uint8)
    mask[E] = 1
    conn.send(MsgType.ERE_CHALLENGE_SET, Writer().bits(mask).getvalue())
    slots = np.stack([2 * E, 2 * E + 1], axis=1).ravel()
    opened = eq_decommit_recv(conn, st, slots).reshape(-1, 2)
    x_hat_e, th_hat_e = opened[:, 0], opened[:, 1]
    if mismatch_rate(s.x[E], x_hat_e, s.theta[E] == th_hat_e) > p.alpha + p.delta_ex:
        conn.abort("bb84-check")
    s.challenge = E
    s.rest = np.flatnonzero(mask == 0)
    s.phase = "checked"

    # steps 7-10
    fams = canonical_families(s.rest, p.k, p.m)
    s.families = fams
    s.r_seeds = rng.bits(2 * p.k * (p.m + LAMBDA_PQS - 1)).reshape(2 * p.k, -1)
    fake = set(cheat.fake) if cheat else set()
    for j in range(2 * p.k):
        if j in fake:
            s.family_seeds[j] = np.frombuffer(rng.random_bytes(2 * p.w * SEED_BYTES),
                                              dtype=np.uint8).reshape(2 * p.w, SEED_BYTES)
        else:
            s.family_seeds[j] = expand_family(family_seed(s.r_seeds[j], s.x[fams[j]]), p.w)
    code = ere_code(p)
    s.syndromes = np.stack([syndrome(code, s.x[fams[j]]) for j in range(2 * p.k)])
    w = Writer().bits(s.theta).u32s(fams.ravel()).bits(s.r_seeds.ravel()).bits(s.syndromes.ravel())
    conn.send(MsgType.ERE_FAMILY_META, w.getvalue())
    s.phase = "families"

    # step 11
    n = s.n_commit
    r = Reader(conn.recv(MsgType.NAOR_KEY))
    s.keys = r.matrix(n, NAOR_BYTES)
    r.done()
    table = family_seed_index(p.k, p.w)
    all_seeds = np.stack([s.family_seeds[j] for j in range(2 * p.k)])
    quads = all_seeds[table[..., 0], table[..., 1]]
    s.u = rng.bits(2 * n).reshape(n, 2)
    s.slots = committed_slots(s.u)
    s.payloads = naor_payloads(s.keys[:, None, :], quads, s.slots)
    conn.send(MsgType.ERE_PAYLOAD_COMMIT, Writer().matrix(s.payloads.reshape(-1, NAOR_BYTES)).getvalue())
    r = Reader(conn.recv(MsgType.ERE_PAIR_CHALLENGE))
    s.gammas = r.bits(p.k)
    r.done()
    shown = 2 * np.arange(p.k) + s.gammas
    w = Writer().bits(np.concatenate([s.x[fams[j]] for j in shown]))
    w.matrix(np.concatenate([s.family_seeds[j] for j in shown]))
    conn.send(MsgType.ERE_PAIR_REVEAL, w.getvalue())
    closed = np.repeat(1 - s.gammas, p.w)
    s.e = bits ^ s.u[np.arange(n), closed]
    conn.send(MsgType.EQ_MASK, Writer().bits(s.e).getvalue())
    s.phase = "committed"
    return s


def ere_commit_receiver(conn: Connection, params: SecurityParams, model: ChannelModel,
                        rng: Drbg, skip: np.ndarray | None = None) -> EreSession:
    """Receiver R: measures, commits to its outcomes, then checks one family
    of every pair."""
    p = params
    s = EreSession("receiver", p)
    n4 = 4 * p.lambda_ex
    batch = Bb84Batch.from_bytes(conn.recv(MsgType.ERE_BB84_BATCH))
    if len(batch) != n4:
        raise ProtocolError(f"expected {n4} BB84 states")
    th = rng.bits(n4)
    out = measure_batch(batch, th, model, model.generator("ere/measure"))
    alive = out >= 0
    conn.send(MsgType.SURVIVORS, Writer().bits(alive.astype(np.uint8)).getvalue())
    s.survivors = np.flatnonzero(alive)
    s.x_hat = out[alive].astype(np.uint8)
    s.theta_hat = th[alive]
    n_s = s.survivors.size

    pairs = np.stack([s.x_hat, s.theta_hat], axis=1).ravel()
    seeds = np.frombuffer(rng.random_bytes(2 * n_s * 4 * SEED_BYTES),
                          dtype=np.uint8).reshape(2 * n_s, 4, SEED_BYTES)
    st = eq_commit_send(conn, pairs, seeds, rng.spawn("eq-committer"))
    s.measurement_commits = st

    r = Reader(conn.recv(MsgType.ERE_CHALLENGE_SET))
    mask = r.bits(n_s)
    r.done()
    if int(mask.sum()) != n_s // 2:
        raise ProtocolError("challenge set has the wrong size")
    E = np.flatnonzero(mask)
    slots = np.stack([2 * E, 2 * E + 1], axis=1).ravel()
    eq_decommit_send(conn, st, slots, rng.spawn("eq-open"))
    s.challenge, s.rest = E, np.flatnonzero(mask == 0)

    r = Reader(conn.recv(MsgType.ERE_FAMILY_META))
    s.theta = r.bits(n_s)
    fams = r.u32s(2 * p.k * p.m).reshape(2 * p.k, p.m)
    s.r_seeds = r.bits(2 * p.k * (p.m + LAMBDA_PQS - 1)).reshape(2 * p.k, -1)
    s.syndromes = r.bits(2 * p.k * ere_code(p).q).reshape(2 * p.k, -1)
    r.done()
    if not np.array_equal(fams, canonical_families(s.rest, p.k, p.m)):
        conn.abort("family-meta")
    s.families = fams
    s.phase = "families"

    n = s.n_commit
    s.keys = np.frombuffer(rng.random_bytes(n * NAOR_BYTES), dtype=np.uint8).reshape(n, NAOR_BYTES)
    conn.send(MsgType.NAOR_KEY, Writer().matrix(s.keys).getvalue())
    r = Reader(conn.recv(MsgType.ERE_PAYLOAD_COMMIT))
    s.payloads = r.matrix(4 * n, NAOR_BYTES).reshape(n, 4, NAOR_BYTES)
    r.done()
    s.gammas = rng.bits(p.k)
    conn.send(MsgType.ERE_PAIR_CHALLENGE, Writer().bits(s.gammas).getvalue())
    r = Reader(conn.recv(MsgType.ERE_PAIR_REVEAL))
    xt = r.bits(p.k * p.m).reshape(p.k, p.m)
    fs = r.matrix(p.k * 2 * p.w, SEED_BYTES).reshape(p.k, 2 * p.w, SEED_BYTES)
    r.done()

    slack = p.alpha + p.family_slack()
    for rr in range(p.k):
        j = 2 * rr + int(s.gammas[rr])
        members = fams[j]
        if mismatch_rate(xt[rr], s.x_hat[members], s.theta[members] == s.theta_hat[members]) > slack:
            conn.abort("error-rate", rr)
        if not np.array_equal(expand_family(family_seed(s.r_seeds[j], xt[rr]), p.w), fs[rr]):
            conn.abort("prg-check", rr)
        s.family_seeds[j] = fs[rr]
        rows = rr * p.w + np.arange(p.w)
        g = int(s.gammas[rr])
        got = naor_open_many(s.keys[rows][:, None, :], s.payloads[rows, 2 * g:2 * g + 2],
                             fs[rr].reshape(p.w, 2, SEED_BYTES))
        bad = (got[:, 0] < 0) | (got[:, 0] != got[:, 1])
        if bad.any():
            conn.abort("decommit-equality", int(rows[np.flatnonzero(bad)[0]]))
    r = Reader(conn.recv(MsgType.EQ_MASK))
    s.e = r.bits(n)
    r.done()
    s.phase = "committed"
    return s


def ere_decommit_committer(conn: Connection, s: EreSession, indices, rng: Drbg) -> None:
    p = s.params
    idx = np.asarray(indices, dtype=np.int64)
    rr, q = np.divmod(idx, p.w)
    delta = rng.bits(idx.size)
    fam = 2 * rr + (1 - s.gammas[rr])
    seeds = np.stack([s.family_seeds[int(j)][2 * int(qq) + int(d)] for j, qq, d in zip(fam, q, delta)]) \
        if idx.size else np.zeros((0, SEED_BYTES), dtype=np.uint8)
    w = Writer().u32s(idx).bits(s.bits[idx]).bits(delta).matrix(seeds)
    conn.send(MsgType.ERE_OPEN, w.getvalue())
    s.phase = "opening"


def ere_decommit_receiver(conn: Connection, s: EreSession, indices) -> np.ndarray:
    p = s.params
    idx = np.asarray(indices, dtype=np.int64)
    r = Reader(conn.recv(MsgType.ERE_OPEN))
    got_idx = r.u32s(idx.size)
    b = r.bits(idx.size)
    delta = r.bits(idx.size)
    seeds = r.matrix(idx.size, SEED_BYTES)
    r.done()
    if not np.array_equal(got_idx, idx):
        raise ProtocolError("opening for unexpected indices")
    gamma = np.repeat(s.gammas, p.w)[idx]
    ok = check_eq_decommit(s.keys[idx], s.payloads[idx], gamma, s.e[idx], b, delta, seeds)
    if not ok.all():
        conn.abort("ere-open", int(idx[np.flatnonzero(~ok)[0]]))
    for i, v in zip(idx.tolist(), b.tolist()):
        s.opened[i] = v
    s.phase = "opening"
    return b
