"""Cheating strategies and Monte-Carlo frequency estimates.

Each strategy deviates only in the step it names; everything else follows
the honest code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel
from .commit import (FamilyCheat, check_eq_decommit, check_eq_open, committed_slots,
                     ere_commit_committer, ere_commit_receiver, naor_payloads, NAOR_BYTES)
from .primitives import SEED_BYTES
from .rng import Drbg
from .secparams import SecurityParams
from .session import Failed, run_pair, session_seeds

_CHUNK = 1 << 15


@dataclass(frozen=True)
class AttackReport:
    kind: str
    parameter: int
    trials: int
    count: int            # passes (binding) or detections (family, skip)
    expected: float | None

    @property
    def frequency(self) -> float:
        return self.count / self.trials if self.trials else float("nan")

    @property
    def sigma(self) -> float:
        p = self.expected if self.expected is not None else self.frequency
        return math.sqrt(p * (1 - p) / self.trials)

    def within(self, k: float = 3.0) -> bool:
        if self.expected is None:
            return True
        return abs(self.frequency - self.expected) <= k * self.sigma + 1e-12

    def to_dict(self) -> dict:
        return {"kind": self.kind, "parameter": self.parameter, "trials": self.trials,
                "count": self.count, "frequency": self.frequency, "expected": self.expected,
                "sigma": self.sigma, "within_3sigma": self.within()}


def attack_binding(t: int, trials: int, seed=None) -> AttackReport:
    """A committer equivocates in ``t`` EqCommitments of each session.

    It guesses every challenge bit; the pair it expects to stay closed holds
    ``(u, 1-u)`` so it can later open either value. A session passes when all
    ``t`` challenge checks pass. Expected frequency 2^-t.
    """
    if t < 0 or trials < 1:
        raise ValueError("need t >= 0 and trials >= 1")
    if t == 0:
        return AttackReport("binding", 0, trials, trials, 1.0)
    root = Drbg(seed, "attack/binding")
    com, rec = root.spawn("committer"), root.spawn("receiver")
    ok = np.empty(trials * t, dtype=bool)
    for lo in range(0, trials * t, _CHUNK):
        n = min(_CHUNK, trials * t - lo)
        seeds = np.frombuffer(com.random_bytes(n * 4 * SEED_BYTES), np.uint8).reshape(n, 4, SEED_BYTES)
        keys = np.frombuffer(rec.random_bytes(n * NAOR_BYTES), np.uint8).reshape(n, NAOR_BYTES)
        u = com.bits(2 * n).reshape(n, 2)
        guess, flip = com.bits(n), com.bits(n)
        slots = committed_slots(u, np.ones(n, bool), guess, flip)
        payloads = naor_payloads(keys[:, None, :], seeds, slots)
        gamma = rec.bits(n)
        rows = np.arange(n)[:, None]
        pair = 2 * gamma[:, None] + np.arange(2)
        ok[lo:lo + n] = check_eq_open(keys, payloads, gamma, slots[rows, pair], seeds[rows, pair])
    passed = int(ok.reshape(trials, t).all(axis=1).sum())
    return AttackReport("binding", t, trials, passed, 2.0 ** -t)


def equivocation_opens_both(seed=None) -> bool:
    """Build one equivocating EqCommitment whose challenge was guessed right
    and check that it opens to 0 and to 1."""
    rng = Drbg(seed, "attack/equivocate")
    seeds = np.frombuffer(rng.random_bytes(4 * SEED_BYTES), np.uint8).reshape(1, 4, SEED_BYTES)
    key = np.frombuffer(rng.random_bytes(NAOR_BYTES), np.uint8).reshape(1, NAOR_BYTES)
    gamma = np.array([rng.bit()], dtype=np.uint8)
    u = rng.bits(2).reshape(1, 2)
    slots = committed_slots(u, np.array([True]), gamma, rng.bits(1))
    payloads = naor_payloads(key[:, None, :], seeds, slots)
    e = np.array([rng.bit()], dtype=np.uint8)
    other = 1 - int(gamma[0])
    for b in (0, 1):
        delta = [d for d in (0, 1) if slots[0, 2 * other + d] == (b ^ int(e[0]))]
        if not delta:
            return False
        d = np.array(delta[:1], dtype=np.uint8)
        seed_row = seeds[0, 2 * other + d[0]][None]
        if not check_eq_decommit(key, payloads, gamma, e, np.array([b], np.uint8), d, seed_row)[0]:
            return False
    return True


def attack_params(lambda_ot: int = 16) -> SecurityParams:
    """Small ERE configuration (k = 8 pairs) for family-level attacks."""
    return SecurityParams.toy(lambda_ot=lambda_ot, m=16, lambda_ex=128)


def run_ere(bits, params: SecurityParams, seed=None, cheat: FamilyCheat | None = None,
            model: ChannelModel | None = None, transport: str = "loopback"):
    """Commit phase of one ERE session; returns (committer, receiver) results."""
    rc, rr, ch = session_seeds(seed)
    if model is None:
        model = ChannelModel(params.alpha, 0.0, params.vartheta, ch)
    return run_pair(lambda c: ere_commit_committer(c, bits, params, model, rc, cheat),
                    lambda c: ere_commit_receiver(c, params, model, rr), params, transport)


def fake_seed_family(c: int, trials: int, params: SecurityParams | None = None, seed=None) -> AttackReport:
    """Committer replaces ``c`` seed families, one in each of ``c`` distinct
    pairs and at a random side, by seeds not derived from PRG(h(x~)).
    Counts sessions the receiver aborts. Expected 1 - 2^-c."""
    p = params or attack_params()
    if not 0 <= c <= p.k:
        raise ValueError(f"c must lie in [0, k={p.k}]")
    root = Drbg(seed, "attack/family")
    caught = 0
    for i in range(trials):
        pick = root.spawn(f"pick/{i}")
        pairs = pick.permutation(p.k)[:c]
        fake = tuple(int(2 * r + pick.bit()) for r in pairs)
        bits = pick.bits(p.w * p.k)
        _, rec = run_ere(bits, p, seed=root.spawn(f"session/{i}").random_bytes(32), cheat=FamilyCheat(fake))
        if isinstance(rec, Failed):
            caught += 1
    return AttackReport("fake_seed_family", c, trials, caught, 1.0 - 2.0 ** -c)


def skip_measurement(n_skip: int, trials: int, params: SecurityParams | None = None, seed=None) -> AttackReport:
    """Receiver leaves ``n_skip`` random positions unmeasured and guesses
    them. Counts sessions in which the sender's test aborts."""
    from .ot import Strategy, run_ot

    p = params or SecurityParams.toy(lambda_ot=1024, m=64, lambda_ex=512)
    root = Drbg(seed, "attack/skip")
    caught = 0
    for i in range(trials):
        pick = root.spawn(f"pick/{i}")
        skip = pick.subset(2 * p.lambda_ot, n_skip)
        res = run_ot(bytes(32), bytes(32), 0, p, seed=pick.random_bytes(32), strategy=Strategy(skip=skip))
        if res.alice.status.startswith("ABORT"):
            caught += 1
    return AttackReport("skip_measurement", n_skip, trials, caught, None)
