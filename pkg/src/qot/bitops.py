"""Bit-string helpers.

Bit-strings are carried as 1-D ``uint8`` arrays holding 0/1 values. On the
wire they are packed MSB-first and zero-padded to a byte boundary; the bit
length always travels separately.
"""

from __future__ import annotations

import numpy as np


def as_bits(x, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a 0/1 uint8 vector, optionally checking its length."""
    arr = np.asarray(x, dtype=np.uint8).reshape(-1)
    if arr.size and arr.max() > 1:
        raise ValueError("bit-string entries must be 0 or 1")
    if n is not None and arr.size != n:
        raise ValueError(f"expected {n} bits, got {arr.size}")
    return arr


def pack(bits) -> bytes:
    return np.packbits(as_bits(bits)).tobytes()


def unpack(data: bytes, nbits: int) -> np.ndarray:
    if len(data) * 8 < nbits:
        raise ValueError(f"{len(data)} bytes cannot hold {nbits} bits")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=nbits)


def to_int(bits) -> int:
    b = as_bits(bits)
    if b.size == 0:
        return 0
    return int.from_bytes(pack(b), "big") >> ((-b.size) % 8)


def from_int(value: int, nbits: int) -> np.ndarray:
    if value < 0 or value >> nbits:
        raise ValueError(f"{value} does not fit in {nbits} bits")
    nbytes = (nbits + 7) // 8
    raw = (value << ((-nbits) % 8)).to_bytes(nbytes, "big")
    return unpack(raw, nbits)


def hamming(a, b) -> int:
    return int(np.count_nonzero(as_bits(a) != as_bits(b)))


def xor(a, b) -> np.ndarray:
    a, b = as_bits(a), as_bits(b)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a ^ b
