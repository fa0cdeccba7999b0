"""Framed duplex transport.

A frame is ``tag (1 byte) | length (u32 little-endian) | payload``. Byte
pipes (in-process loopback or a socket) carry frames; :class:`Connection`
adds typed send/receive, abort handling and a running transcript hash.
"""

from __future__ import annotations

import hashlib
import queue
import socket
import struct
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .bitops import pack, unpack

HEADER = struct.Struct("<BI")
MAX_PAYLOAD = 0xFFFFFFFF
DEFAULT_TIMEOUT = 120.0


class MsgType(IntEnum):
    HANDSHAKE = 0x01
    ABORT = 0x02
    SURVIVORS = 0x03
    NAOR_KEY = 0x10
    NAOR_PAYLOAD = 0x11
    EQ_CHALLENGE = 0x12
    EQ_OPEN = 0x13
    EQ_MASK = 0x14
    EQ_DECOMMIT = 0x15
    ERE_BB84_BATCH = 0x20
    ERE_CHALLENGE_SET = 0x21
    ERE_FAMILY_META = 0x22
    ERE_PAIR_CHALLENGE = 0x23
    ERE_PAIR_REVEAL = 0x24
    ERE_PAYLOAD_COMMIT = 0x25
    ERE_OPEN = 0x26
    OT_BB84_BATCH = 0x30
    OT_CHALLENGE_SET = 0x31
    OT_BASES = 0x32
    OT_PARTITION = 0x33
    OT_SYNDROMES = 0x34
    OT_CIPHERTEXTS = 0x35
    OT_ABORT = 0x36
    OT_ASSIGNMENT = 0x37


_KNOWN = frozenset(int(t) for t in MsgType)
ABORT_TAGS = (MsgType.ABORT, MsgType.OT_ABORT)


class TransportError(Exception):
    """Framing violation, truncated stream, timeout or vanished peer."""


class ProtocolAbort(Exception):
    """A party stopped the protocol (the algorithms' "abort")."""

    def __init__(self, stage: str, index: int | None = None, remote: bool = False):
        self.stage = stage
        self.index = index
        self.remote = remote
        where = "peer" if remote else "local"
        extra = f" at index {index}" if index is not None else ""
        super().__init__(f"{where} abort in stage {stage!r}{extra}")


class ProtocolError(ProtocolAbort):
    """Well-framed but malformed or unexpected message."""

    def __init__(self, detail: str):
        super().__init__("malformed")
        self.args = (f"protocol error: {detail}",)


class Frame(NamedTuple):
    tag: MsgType
    payload: bytes


def encode_frame(tag, payload: bytes = b"") -> bytes:
    if int(tag) not in _KNOWN:
        raise TransportError(f"unknown message type 0x{int(tag):02x}")
    if len(payload) > MAX_PAYLOAD:
        raise TransportError("payload exceeds 2^32 - 1 bytes")
    return HEADER.pack(int(tag), len(payload)) + bytes(payload)


class FrameDecoder:
    """Incremental frame parser. Any malformed input raises
    :class:`TransportError`; after that the decoder stays failed."""

    def __init__(self, max_payload: int = 1 << 30):
        self.max_payload = max_payload
        self._buf = bytearray()
        self._failed = False

    def feed(self, data: bytes) -> list[Frame]:
        if self._failed:
            raise TransportError("decoder already failed")
        self._buf += data
        out = []
        while len(self._buf) >= HEADER.size:
            tag, length = HEADER.unpack_from(self._buf)
            if tag not in _KNOWN:
                self._failed = True
                raise TransportError(f"unknown message type 0x{tag:02x}")
            if length > self.max_payload:
                self._failed = True
                raise TransportError(f"frame of {length} bytes exceeds limit")
            end = HEADER.size + length
            if len(self._buf) < end:
                break
            out.append(Frame(MsgType(tag), bytes(self._buf[HEADER.size:end])))
            del self._buf[:end]
        return out

    @property
    def pending(self) -> int:
        return len(self._buf)

    def finish(self) -> None:
        if self._buf:
            raise TransportError(f"stream ended inside a frame ({len(self._buf)} bytes left)")


def decode_frames(data: bytes) -> list[Frame]:
    dec = FrameDecoder()
    frames = dec.feed(data)
    dec.finish()
    return frames


# -- byte pipes -------------------------------------------------------------

class LoopbackPipe:
    _CLOSED = None

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue, timeout: float):
        self._in, self._out, self.timeout = inbox, outbox, timeout

    def send_bytes(self, data: bytes) -> None:
        self._out.put(bytes(data))

    def recv_bytes(self) -> bytes:
        try:
            item = self._in.get(timeout=self.timeout)
        except queue.Empty:
            raise TransportError("receive timed out") from None
        if item is self._CLOSED:
            self._in.put(item)
            raise TransportError("peer closed the connection")
        return item

    def close(self) -> None:
        self._out.put(self._CLOSED)


def loopback_pair(timeout: float = DEFAULT_TIMEOUT):
    a, b = queue.Queue(), queue.Queue()
    return LoopbackPipe(a, b, timeout), LoopbackPipe(b, a, timeout)


class SocketPipe:
    def __init__(self, sock: socket.socket, timeout: float = DEFAULT_TIMEOUT):
        self.sock = sock
        sock.settimeout(timeout)

    def send_bytes(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def recv_bytes(self) -> bytes:
        try:
            data = self.sock.recv(1 << 16)
        except socket.timeout:
            raise TransportError("receive timed out") from None
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        if not data:
            raise TransportError("peer closed the connection")
        return data

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def socket_pair(timeout: float = DEFAULT_TIMEOUT):
    a, b = socket.socketpair()
    return SocketPipe(a, timeout), SocketPipe(b, timeout)


def connect(host: str, port: int, timeout: float = DEFAULT_TIMEOUT) -> SocketPipe:
    return SocketPipe(socket.create_connection((host, port), timeout=timeout), timeout)


def listen(host: str, port: int, backlog: int = 16) -> socket.socket:
    srv = socket.create_server((host, port), backlog=backlog, reuse_port=False)
    return srv


# -- typed connection ---------------------------------------------------------

class Connection:
    """Frames over a byte pipe, with a hash of everything sent and received."""

    def __init__(self, pipe, name: str = "", record: bool = False):
        self.pipe = pipe
        self.name = name
        # (direction, tag, payload) for every frame, when ``record`` is set
        self.frames: list | None = [] if record else None
        self._dec = FrameDecoder()
        self._queue: list[Frame] = []
        self._log = hashlib.sha256()
        self.frames_sent = 0
        self.frames_received = 0
        self.bytes_sent = 0

    def _record(self, direction: bytes, raw: bytes) -> None:
        self._log.update(direction)
        self._log.update(raw)
        if self.frames is not None:
            self.frames.append((direction.decode(), MsgType(raw[0]), raw[HEADER.size:]))

    def send(self, tag, payload: bytes = b"") -> None:
        raw = encode_frame(tag, payload)
        self._record(b">", raw)
        self.frames_sent += 1
        self.bytes_sent += len(raw)
        self.pipe.send_bytes(raw)

    def _next_frame(self) -> Frame:
        while not self._queue:
            self._queue.extend(self._dec.feed(self.pipe.recv_bytes()))
        return self._queue.pop(0)

    def recv(self, *expected) -> bytes:
        frame = self._next_frame()
        self._record(b"<", encode_frame(frame.tag, frame.payload))
        self.frames_received += 1
        if frame.tag in ABORT_TAGS:
            stage = frame.payload.decode("utf-8", "replace") or "unspecified"
            raise ProtocolAbort(stage, remote=True)
        if expected and frame.tag not in expected:
            self.abort("unexpected-message")
        return frame.payload

    def abort(self, stage: str, index: int | None = None, tag=MsgType.ABORT):
        """Tell the peer, then raise locally."""
        try:
            self.send(tag, stage.encode())
        except TransportError:
            pass
        raise ProtocolAbort(stage, index)

    def digest(self) -> bytes:
        return self._log.copy().digest()

    def close(self) -> None:
        self.pipe.close()


def handshake(conn: Connection, params_digest: bytes) -> None:
    """Exchange the 32-byte parameter digest; abort on mismatch."""
    conn.send(MsgType.HANDSHAKE, params_digest)
    theirs = conn.recv(MsgType.HANDSHAKE)
    if theirs != params_digest:
        conn.abort("params-digest")


# -- payload codec ------------------------------------------------------------

class Writer:
    def __init__(self):
        self._parts = []

    def u8(self, v):
        self._parts.append(struct.pack("<B", v))
        return self

    def u32(self, v):
        self._parts.append(struct.pack("<I", v))
        return self

    def bits(self, arr):
        arr = np.asarray(arr, dtype=np.uint8)
        self.u32(arr.size)
        self._parts.append(pack(arr))
        return self

    def blob(self, data: bytes):
        self.u32(len(data))
        self._parts.append(bytes(data))
        return self

    def u32s(self, arr):
        arr = np.asarray(arr, dtype="<u4")
        self.u32(arr.size)
        self._parts.append(arr.tobytes())
        return self

    def matrix(self, arr):
        """2-D uint8 array (e.g. one seed or Naor string per row)."""
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        rows, cols = arr.shape
        self.u32(rows).u32(cols)
        self._parts.append(arr.tobytes())
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes):
        self._d = memoryview(data)
        self._p = 0

    def _take(self, n):
        if n < 0 or self._p + n > len(self._d):
            raise ProtocolError("payload truncated")
        out = self._d[self._p:self._p + n]
        self._p += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def bits(self, expect: int | None = None) -> np.ndarray:
        n = self.u32()
        if expect is not None and n != expect:
            raise ProtocolError(f"expected {expect} bits, got {n}")
        raw = bytes(self._take((n + 7) // 8))
        return unpack(raw, n) if n else np.zeros(0, dtype=np.uint8)

    def blob(self) -> bytes:
        return bytes(self._take(self.u32()))

    def u32s(self, expect: int | None = None) -> np.ndarray:
        n = self.u32()
        if expect is not None and n != expect:
            raise ProtocolError(f"expected {expect} entries, got {n}")
        return np.frombuffer(bytes(self._take(4 * n)), dtype="<u4").astype(np.int64)

    def matrix(self, rows: int | None = None, cols: int | None = None) -> np.ndarray:
        r, c = self.u32(), self.u32()
        if (rows is not None and r != rows) or (cols is not None and c != cols):
            raise ProtocolError(f"expected a {rows}x{cols} matrix, got {r}x{c}")
        return np.frombuffer(bytes(self._take(r * c)), dtype=np.uint8).reshape(r, c)

    def done(self) -> None:
        if self._p != len(self._d):
            raise ProtocolError("trailing bytes in payload")
