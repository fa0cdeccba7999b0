import os
import threading

import numpy as np
import pytest

from fuzzing import run_fuzz
from qot.transport import (Connection, Frame, FrameDecoder, MsgType, ProtocolAbort, ProtocolError,
                           Reader, TransportError, Writer, decode_frames, encode_frame, handshake,
                           loopback_pair, socket_pair)


def test_empty_payload_is_five_bytes():
    raw = encode_frame(MsgType.ABORT)
    assert raw == b"\x02\x00\x00\x00\x00"
    assert decode_frames(raw) == [Frame(MsgType.ABORT, b"")]


def test_header_layout_little_endian():
    raw = encode_frame(MsgType.EQ_OPEN, b"xyz")
    assert raw[:5] == bytes([0x13, 3, 0, 0, 0]) and raw[5:] == b"xyz"


def test_random_payload_roundtrip():
    rng = np.random.default_rng(0)
    tags = list(MsgType)
    for _ in range(10_000):
        tag = tags[int(rng.integers(len(tags)))]
        payload = rng.integers(0, 256, 1024, dtype=np.uint8).tobytes()
        assert decode_frames(encode_frame(tag, payload)) == [Frame(tag, payload)]


def test_stream_split_at_every_offset():
    stream = b"".join(encode_frame(t, bytes([t]) * t) for t in (MsgType.NAOR_KEY, MsgType.OT_BASES))
    for cut in range(len(stream) + 1):
        dec = FrameDecoder()
        frames = dec.feed(stream[:cut]) + dec.feed(stream[cut:])
        dec.finish()
        assert [f.tag for f in frames] == [MsgType.NAOR_KEY, MsgType.OT_BASES]


def test_unknown_tag_rejected():
    with pytest.raises(TransportError):
        decode_frames(b"\xff\x00\x00\x00\x00")
    with pytest.raises(TransportError):
        encode_frame(0xFF, b"")


def test_truncated_stream_is_error():
    with pytest.raises(TransportError):
        decode_frames(encode_frame(MsgType.OT_SYNDROMES, b"abcdef")[:-1])
    with pytest.raises(TransportError):
        decode_frames(b"\x01\x00")


def test_oversize_rejected():
    dec = FrameDecoder(max_payload=16)
    with pytest.raises(TransportError):
        dec.feed(encode_frame(MsgType.OT_BASES, bytes(17)))
    with pytest.raises(TransportError):
        dec.feed(b"")  # stays failed


def test_fuzzed_streams_never_crash():
    tally = run_fuzz(20_000, seed=1)
    assert sum(tally.values()) == 20_000
    assert min(tally.values()) > 0


def test_codec_roundtrip_and_errors():
    bits = np.array([1, 0, 1, 1, 0, 0, 0, 1, 1], np.uint8)
    mat = np.arange(12, dtype=np.uint8).reshape(3, 4)
    raw = Writer().u8(7).u32(1 << 31).bits(bits).blob(b"hi").u32s([1, 2, 3]).matrix(mat).getvalue()
    r = Reader(raw)
    assert r.u8() == 7 and r.u32() == 1 << 31
    assert np.array_equal(r.bits(9), bits)
    assert r.blob() == b"hi"
    assert r.u32s().tolist() == [1, 2, 3]
    assert np.array_equal(r.matrix(3, 4), mat)
    r.done()
    with pytest.raises(ProtocolError):
        Reader(raw).u8() and Reader(raw[:3]).u32()
    with pytest.raises(ProtocolError):
        Reader(Writer().bits(bits).getvalue()).bits(8)
    with pytest.raises(ProtocolError):
        Reader(raw).done()


def _pair(kind):
    a, b = loopback_pair(timeout=5) if kind == "loopback" else socket_pair(timeout=5)
    return Connection(a, "a"), Connection(b, "b")


@pytest.mark.parametrize("kind", ["loopback", "socket"])
def test_connection_abort_reaches_peer(kind):
    a, b = _pair(kind)
    a.send(MsgType.NAOR_KEY, b"k")
    assert b.recv(MsgType.NAOR_KEY) == b"k"
    with pytest.raises(ProtocolAbort) as local:
        b.abort("bb84-check", index=3)
    assert local.value.stage == "bb84-check" and local.value.index == 3 and not local.value.remote
    with pytest.raises(ProtocolAbort) as remote:
        a.recv(MsgType.NAOR_PAYLOAD)
    assert remote.value.remote and remote.value.stage == "bb84-check"
    a.close(), b.close()


def test_unexpected_message_aborts_both_sides():
    a, b = _pair("loopback")
    a.send(MsgType.OT_BASES, b"")
    with pytest.raises(ProtocolAbort, match="unexpected-message"):
        b.recv(MsgType.OT_PARTITION)
    with pytest.raises(ProtocolAbort):
        a.recv()


@pytest.mark.parametrize("kind", ["loopback", "socket"])
def test_peer_disconnect_is_transport_error(kind):
    a, b = _pair(kind)
    a.close()
    with pytest.raises(TransportError):
        b.recv()


def test_receive_timeout():
    a, _ = loopback_pair(timeout=0.05)
    with pytest.raises(TransportError, match="timed out"):
        Connection(a).recv()


def test_handshake_digest_mismatch():
    a, b = _pair("loopback")
    errs = {}

    def side(conn, d, key):
        try:
            handshake(conn, d)
        except ProtocolAbort as exc:
            errs[key] = exc

    t = threading.Thread(target=side, args=(a, b"\x00" * 32, "a"))
    t.start()
    side(b, b"\x01" * 32, "b")
    t.join()
    assert errs["a"].stage == errs["b"].stage == "params-digest"


def test_transcript_digest_tracks_traffic():
    a, b = _pair("loopback")
    a.send(MsgType.NAOR_KEY, b"x")
    b.recv()
    b2, a2 = _pair("loopback")
    b2.send(MsgType.NAOR_KEY, b"x")
    a2.recv()
    assert a.digest() == b2.digest() and b.digest() == a2.digest()
    assert a.digest() != b.digest()
