"""Frame-decoder fuzzing shared by the unit and acceptance tests."""

import numpy as np

from qot.transport import HEADER, FrameDecoder, MsgType, TransportError, encode_frame

_TAGS = [int(t) for t in MsgType]


def fuzz_inputs(count: int, seed: int = 0):
    """Yield byte strings: pure noise, and valid frame streams that were
    truncated, bit-flipped, spliced or had their length field rewritten."""
    rng = np.random.default_rng(seed)
    noise = rng.integers(0, 256, size=count * 24, dtype=np.uint8).tobytes()
    for i in range(count):
        kind = i % 4
        if kind == 0:
            off = int(rng.integers(0, len(noise) - 48))
            yield noise[off:off + int(rng.integers(0, 48))]
            continue
        frames = b"".join(encode_frame(_TAGS[int(rng.integers(len(_TAGS)))],
                                       noise[j * 7:j * 7 + int(rng.integers(0, 20))])
                          for j in range(int(rng.integers(1, 4))))
        buf = bytearray(frames)
        if kind == 1:
            buf = buf[:int(rng.integers(0, len(buf) + 1))]
        elif kind == 2:
            pos = int(rng.integers(len(buf)))
            buf[pos] ^= 1 << int(rng.integers(8))
        else:
            length = int(rng.integers(0, 1 << 32))
            buf[1:5] = length.to_bytes(4, "little")
        yield bytes(buf)


def check_one(data: bytes) -> str:
    """Decode in two arbitrary chunks. Returns "ok", "partial" or "error";
    raises AssertionError on anything other than TransportError."""
    dec = FrameDecoder(max_payload=1 << 20)
    cut = len(data) // 3
    try:
        frames = dec.feed(data[:cut]) + dec.feed(data[cut:])
    except TransportError:
        return "error"
    consumed = b"".join(encode_frame(f.tag, f.payload) for f in frames)
    assert data.startswith(consumed)
    assert len(consumed) + dec.pending == len(data)
    if dec.pending:
        try:
            dec.finish()
        except TransportError:
            return "partial"
        raise AssertionError("finish() accepted a dangling partial frame")
    return "ok"


def run_fuzz(count: int, seed: int = 0) -> dict:
    tally = {"ok": 0, "partial": 0, "error": 0}
    for data in fuzz_inputs(count, seed):
        tally[check_one(data)] += 1
    return tally


assert HEADER.size == 5
