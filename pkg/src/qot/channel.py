"""BB84 prepare/transmit/measure simulation.

Noise is applied when a state is measured, so the matched-basis error rate
equals ``alpha`` exactly. The channel only marks instances as lost or as
multiphoton (leaked); it never touches the encoded bit or basis.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .rng import Drbg


class Basis(IntEnum):
    RECT = 0
    DIAG = 1


class _Lost:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "LOST"

    def __bool__(self):
        return False


LOST = _Lost()
LOST_MARK = -1


@dataclass(frozen=True)
class Bb84Instance:
    bit: int
    basis: Basis
    lost: bool = False
    multiphoton: bool = False


@dataclass(frozen=True)
class ChannelModel:
    alpha: float = 0.0
    loss_prob: float = 0.0
    vartheta: float = 0.0
    rng_seed: bytes = bytes(32)

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError("alpha must lie in [0, 0.5)")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss_prob must lie in [0, 1]")
        if not 0.0 <= self.vartheta < 1.0:
            raise ValueError("vartheta must lie in [0, 1)")
        if len(self.rng_seed) != 32:
            raise ValueError("rng_seed must be 256 bits")

    def generator(self, label: str) -> np.random.Generator:
        """Numpy generator for one named use of the channel seed."""
        digest = hashlib.sha256(self.rng_seed + b"/" + label.encode()).digest()
        return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))


class Bb84Batch:
    """A column-store list of :class:`Bb84Instance` records."""

    __slots__ = ("bit", "basis", "lost", "multiphoton")

    def __init__(self, bit, basis, lost=None, multiphoton=None):
        bit = np.array(bit, dtype=np.uint8).reshape(-1)
        basis = np.array(basis, dtype=np.uint8).reshape(-1)
        n = bit.size
        if basis.size != n:
            raise ValueError("bit and basis arrays differ in length")
        if (bit > 1).any() or (basis > 1).any():
            raise ValueError("bits and bases must be 0/1")
        lost = np.zeros(n, bool) if lost is None else np.array(lost, dtype=bool).reshape(-1)
        mp = np.zeros(n, bool) if multiphoton is None else np.array(multiphoton, dtype=bool).reshape(-1)
        if lost.size != n or mp.size != n:
            raise ValueError("flag arrays differ in length")
        for a in (bit, basis, lost, mp):
            a.flags.writeable = False
        self.bit, self.basis, self.lost, self.multiphoton = bit, basis, lost, mp

    def __len__(self):
        return self.bit.size

    def __getitem__(self, i):
        if isinstance(i, (slice, np.ndarray, list)):
            return Bb84Batch(self.bit[i], self.basis[i], self.lost[i], self.multiphoton[i])
        return Bb84Instance(int(self.bit[i]), Basis(int(self.basis[i])),
                            bool(self.lost[i]), bool(self.multiphoton[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, Bb84Batch):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __repr__(self):
        return f"Bb84Batch(n={len(self)}, lost={int(self.lost.sum())}, multiphoton={int(self.multiphoton.sum())})"

    @classmethod
    def from_instances(cls, items) -> "Bb84Batch":
        items = list(items)
        return cls([i.bit for i in items], [int(i.basis) for i in items],
                   [i.lost for i in items], [i.multiphoton for i in items])

    def to_bytes(self) -> bytes:
        rec = (self.bit | (self.basis << 1) | (self.lost.astype(np.uint8) << 2)
               | (self.multiphoton.astype(np.uint8) << 3))
        return rec.astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bb84Batch":
        rec = np.frombuffer(data, dtype=np.uint8)
        if (rec >> 4).any():
            raise ValueError("BB84 record with reserved bits set")
        return cls(rec & 1, (rec >> 1) & 1, (rec >> 2) & 1, (rec >> 3) & 1)


def _random_bits(rng, n):
    if isinstance(rng, Drbg):
        return rng.bits(n)
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def prepare_batch(n: int, rng) -> Bb84Batch:
    """``n`` states with i.i.d. uniform bits and bases."""
    if n < 1:
        raise ValueError("batch size must be at least 1")
    bits = _random_bits(rng, n)
    bases = _random_bits(rng, n)
    return Bb84Batch(bits, bases)


def transmit(batch: Bb84Batch, model: ChannelModel, rng: np.random.Generator) -> Bb84Batch:
    n = len(batch)
    if n == 0:
        raise ValueError("empty batch")
    lost = batch.lost | (rng.random(n) < model.loss_prob)
    mp = batch.multiphoton | (rng.random(n) < model.vartheta)
    return Bb84Batch(batch.bit, batch.basis, lost, mp)


def measure(inst: Bb84Instance, basis, model: ChannelModel, rng: np.random.Generator):
    """Measure one state. Returns the outcome bit, or ``LOST``."""
    if inst.lost:
        return LOST
    if int(basis) == int(inst.basis):
        return inst.bit ^ int(rng.random() < model.alpha)
    return int(rng.integers(0, 2))


def measure_batch(batch: Bb84Batch, bases, model: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`measure`. Lost positions hold ``LOST_MARK`` (-1)."""
    bases = np.asarray(bases, dtype=np.uint8).reshape(-1)
    n = len(batch)
    if bases.size != n:
        raise ValueError("one basis per instance required")
    flips = (rng.random(n) < model.alpha).astype(np.uint8)
    coin = rng.integers(0, 2, size=n, dtype=np.uint8)
    matched = bases == batch.basis
    out = np.where(matched, batch.bit ^ flips, coin).astype(np.int8)
    out[batch.lost] = LOST_MARK
    return out
