"""Classical building blocks: SHAKE-256 PRG, Toeplitz hashing and Naor's
bit commitment."""

from __future__ import annotations

import hashlib

import numpy as np

from . import kernels
from .bitops import as_bits, pack, to_int, unpack

LAMBDA_PQS = 256
SEED_BYTES = LAMBDA_PQS // 8


def prg_bytes(seed: bytes, nbytes: int) -> bytes:
    """Raw XOF output. ``prg_expand`` is the bit-level view of the same stream."""
    return hashlib.shake_256(seed).digest(nbytes)


def prg_expand(seed, out_len: int) -> np.ndarray:
    """Stretch ``seed`` (bits, or raw bytes) to ``out_len`` pseudo-random bits.

    Outputs for the same seed are prefix-consistent across lengths.
    """
    if out_len < 1:
        raise ValueError("out_len must be at least 1")
    raw = seed if isinstance(seed, (bytes, bytearray)) else pack(seed)
    return unpack(prg_bytes(bytes(raw), (out_len + 7) // 8), out_len)


def universal_hash(seed, x, ell: int | None = None) -> np.ndarray:
    """Multiply ``x`` by the Toeplitz matrix defined by ``seed`` over GF(2).

    ``seed`` has ``len(x) + ell - 1`` bits; ``ell`` defaults to whatever that
    leaves.
    """
    x = as_bits(x)
    seed = as_bits(seed)
    m = x.size
    if m == 0:
        raise ValueError("cannot hash an empty string")
    if ell is None:
        ell = seed.size - m + 1
    if ell < 1 or seed.size != m + ell - 1:
        raise ValueError(f"Toeplitz seed needs {m} + ell - 1 bits, got {seed.size}")
    return kernels.toeplitz_mul(seed, x, ell)


def hash_to_seed(seed, x) -> bytes:
    """``universal_hash`` output packed as a PRG seed."""
    return pack(universal_hash(seed, x))


# -- Naor commitment ----------------------------------------------------------
# The randomness r is a PRG seed; W(r) is its 3*lam-bit expansion. Integers
# hold the 3*lam-bit strings MSB-first so XOR is a single operation.

def naor_stretch(r: bytes, lam: int) -> int:
    nbits = 3 * lam
    nbytes = (nbits + 7) // 8
    return int.from_bytes(prg_bytes(r, nbytes), "big") >> (8 * nbytes - nbits)


def naor_payload(key: int, b: int, r: bytes, lam: int) -> int:
    w = naor_stretch(r, lam)
    return w ^ key if b else w


def naor_open(key: int, payload: int, r: bytes, lam: int) -> int | None:
    """The bit that ``r`` opens ``payload`` to, or None if it opens nothing.

    With the degenerate key 0 both bits verify; 0 is reported.
    """
    w = naor_stretch(r, lam)
    if payload == w:
        return 0
    if payload == w ^ key:
        return 1
    return None


def _naor_args(k, r):
    k = as_bits(k)
    r = as_bits(r)
    if k.size != 3 * r.size:
        raise ValueError(f"key must be 3*{r.size} bits, got {k.size}")
    return k, r


def naor_commit(k, b: int, r) -> np.ndarray:
    """Payload ``(b*k) XOR W(r)`` as a bit array."""
    k, r = _naor_args(k, r)
    lam = r.size
    return _int_bits(naor_payload(to_int(k), int(b) & 1, pack(r), lam), 3 * lam)


def naor_verify(k, payload, b: int, r) -> bool:
    k, r = _naor_args(k, r)
    payload = as_bits(payload)
    if payload.size != k.size:
        return False
    return to_int(payload) == naor_payload(to_int(k), int(b) & 1, pack(r), r.size)


def _int_bits(v: int, n: int) -> np.ndarray:
    nbytes = (n + 7) // 8
    return unpack((v << (8 * nbytes - n)).to_bytes(nbytes, "big"), n)
