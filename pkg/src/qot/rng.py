"""Seedable, splittable randomness.

Protocol randomness (challenges, seeds, keys) comes from :class:`Drbg`, a
SHAKE-256 counter-mode generator. Channel simulation uses numpy generators
derived from it, since only statistical quality matters there.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

SEED_ENV = "QOT_SEED"
_BLOCK = 1 << 14


def default_seed() -> bytes | None:
    """Seed from the ``QOT_SEED`` environment variable, if set."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    return normalize_seed(raw)


def normalize_seed(seed) -> bytes:
    if isinstance(seed, (bytes, bytearray)):
        return bytes(seed)
    if isinstance(seed, (int, np.integer)):
        seed = int(seed)
        if seed < 0:
            raise ValueError("integer seeds must be non-negative")
        return seed.to_bytes(max(32, (seed.bit_length() + 7) // 8), "big")
    if isinstance(seed, str):
        s = seed.strip()
        try:
            return normalize_seed(int(s, 0))
        except ValueError:
            return hashlib.sha256(s.encode()).digest()
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


class Drbg:
    """Deterministic random bit generator built on SHAKE-256.

    Two instances created from the same seed and label produce the same
    stream. ``spawn`` derives independent children, which is how a party
    hands separate streams to sub-protocols.
    """

    def __init__(self, seed=None, label: bytes | str = b""):
        if seed is None:
            seed = default_seed()
        if seed is None:
            seed = os.urandom(32)
        if isinstance(label, str):
            label = label.encode()
        self._key = hashlib.sha256(b"qot/drbg\x00" + label + b"\x00" + normalize_seed(seed)).digest()
        self._ctr = 0
        self._buf = b""
        self._pos = 0

    def spawn(self, label: bytes | str) -> "Drbg":
        if isinstance(label, str):
            label = label.encode()
        return Drbg(self._key, label=b"spawn/" + label)

    def random_bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            if self._pos >= len(self._buf):
                self._buf = hashlib.shake_256(self._key + self._ctr.to_bytes(8, "big")).digest(max(_BLOCK, n))
                self._ctr += 1
                self._pos = 0
            take = min(n - len(out), len(self._buf) - self._pos)
            out += self._buf[self._pos:self._pos + take]
            self._pos += take
        return bytes(out)

    def bits(self, n: int) -> np.ndarray:
        raw = self.random_bytes((n + 7) // 8)
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=n)

    def bit(self) -> int:
        return self.random_bytes(1)[0] & 1

    def uint64(self, n: int) -> np.ndarray:
        return np.frombuffer(self.random_bytes(8 * n), dtype="<u8").copy()

    def integers(self, bound: int, n: int) -> np.ndarray:
        """``n`` integers uniform on ``[0, bound)`` (modulo bias below 2^-40)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound > 1 << 24:
            raise ValueError("bound too large for the low-bias reduction")
        return (self.uint64(n) % np.uint64(bound)).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        keys = self.uint64(n)
        return np.argsort(keys, kind="stable").astype(np.int64)

    def subset(self, universe: int, size: int) -> np.ndarray:
        """Sorted uniform subset of ``range(universe)`` without replacement."""
        if not 0 <= size <= universe:
            raise ValueError(f"cannot draw {size} of {universe}")
        return np.sort(self.permutation(universe)[:size])

    def numpy(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(int.from_bytes(self.random_bytes(32), "big")))
