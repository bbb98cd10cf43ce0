"""Master<->slave mailboxes with two swappable backends.

Both backends live in one process and expose the same star topology: every
slave holds exactly one channel, to the master, and no slave-to-slave channel
can be constructed.  They differ only in how a message's term payload moves:

* ``MessagePassingTransport`` marshals the payload through the binary wire
  format below, ships the bytes, and rebuilds fresh terms on receipt: the
  full serialize/copy/deserialize cost of a message-passing library, with
  every payload byte accounted.
* ``SharedBufferTransport`` hands the payload tuple over by reference, a
  zero-copy ownership transfer; it accounts handle transfers instead of
  bytes.  After sending, the sending side must not touch the payload again.

Wire format (little-endian): ``u32 term_count``, then per term ``u8 sign``
(0 plus, 1 minus), ``u32 magnitude_byte_len``, the magnitude bytes
(little-endian, minimal length), ``u16 factor_count``, then per factor
``u32 symbol_id`` and ``u32 exponent``.

Per-slave mailboxes are bounded (finite buffers); a send to a full mailbox
blocks until the slave drains it.
"""

from __future__ import annotations

import enum
import queue
import struct
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

from .terms import Term

MAILBOX_BOUND = 16

_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_TERM_HDR = struct.Struct("<BI")
_FACTOR = struct.Struct("<II")
_U32_MAX = 0xFFFFFFFF
_U16_MAX = 0xFFFF


class WireError(ValueError):
    """Malformed bytes on the message-passing wire."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ChannelClosedError(RuntimeError):
    """Use of a channel after its Shutdown message."""


class MessageKind(enum.Enum):
    CHUNK_ASSIGNMENT = "chunk"
    RUN_RETURN = "run"
    MODULE_BEGIN = "module"
    SHUTDOWN = "shutdown"


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    chunk_seq: Optional[int] = None
    payload: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Endpoint:
    """Master (worker is None) or a specific slave."""

    worker: Optional[int] = None

    @property
    def is_master(self) -> bool:
        return self.worker is None

    @staticmethod
    def master() -> "Endpoint":
        return Endpoint(None)

    @staticmethod
    def slave(worker: int) -> "Endpoint":
        return Endpoint(worker)


@dataclass(frozen=True)
class TransportStats:
    messages_master_to_slave: int = 0
    messages_slave_to_master: int = 0
    serialized_bytes: int = 0
    handle_transfers: int = 0

    def __add__(self, other: "TransportStats") -> "TransportStats":
        return TransportStats(
            self.messages_master_to_slave + other.messages_master_to_slave,
            self.messages_slave_to_master + other.messages_slave_to_master,
            self.serialized_bytes + other.serialized_bytes,
            self.handle_transfers + other.handle_transfers,
        )

    @property
    def messages(self) -> int:
        return self.messages_master_to_slave + self.messages_slave_to_master


def serialize_terms(ts: Sequence[Term]) -> bytes:
    if len(ts) > _U32_MAX:
        raise WireError(f"term count {len(ts)} exceeds u32", 0)
    parts = [_U32.pack(len(ts))]
    append = parts.append
    for coeff, mono in ts:
        if coeff < 0:
            sign, mag = 1, -coeff
        else:
            sign, mag = 0, coeff
        mag_bytes = mag.to_bytes((mag.bit_length() + 7) // 8, "little")
        if len(mag_bytes) > _U32_MAX:
            raise WireError("coefficient magnitude exceeds u32 byte length", 0)
        if len(mono) > _U16_MAX:
            raise WireError(f"factor count {len(mono)} exceeds u16", 0)
        append(_TERM_HDR.pack(sign, len(mag_bytes)))
        append(mag_bytes)
        append(_U16.pack(len(mono)))
        for sid, exp in mono:
            if sid > _U32_MAX or exp > _U32_MAX:
                raise WireError(f"factor ({sid}, {exp}) exceeds u32", 0)
            append(_FACTOR.pack(sid, exp))
    return b"".join(parts)


def deserialize_terms(data: bytes) -> tuple[Term, ...]:
    n = len(data)

    def need(offset: int, count: int) -> None:
        if offset + count > n:
            raise WireError("truncated input", offset)

    need(0, 4)
    (term_count,) = _U32.unpack_from(data, 0)
    offset = 4
    out: list[Term] = []
    for _ in range(term_count):
        need(offset, 5)
        sign, mag_len = _TERM_HDR.unpack_from(data, offset)
        if sign not in (0, 1):
            raise WireError(f"invalid sign byte {sign}", offset)
        offset += 5
        need(offset, mag_len)
        mag_bytes = data[offset:offset + mag_len]
        if mag_len and mag_bytes[-1] == 0:
            raise WireError("non-minimal coefficient magnitude", offset)
        mag = int.from_bytes(mag_bytes, "little")
        if sign and mag == 0:
            raise WireError("negative zero coefficient", offset)
        offset += mag_len
        need(offset, 2)
        (factor_count,) = _U16.unpack_from(data, offset)
        offset += 2
        factors: list[tuple[int, int]] = []
        prev_sid = -1
        for _ in range(factor_count):
            need(offset, 8)
            sid, exp = _FACTOR.unpack_from(data, offset)
            if sid <= prev_sid:
                raise WireError(f"symbol ids not strictly increasing ({sid})", offset)
            if exp == 0:
                raise WireError("zero exponent", offset)
            prev_sid = sid
            factors.append((sid, exp))
            offset += 8
        out.append((-mag if sign else mag, tuple(factors)))
    if offset != n:
        raise WireError("overlong input (trailing bytes)", offset)
    return tuple(out)


def wire_size(ts: Sequence[Term]) -> int:
    """Exact encoded size of a payload, without building the bytes."""
    total = 4
    for coeff, mono in ts:
        mag = -coeff if coeff < 0 else coeff
        total += 1 + 4 + (mag.bit_length() + 7) // 8 + 2 + 8 * len(mono)
    return total


class _TransportBase:
    """Queue plumbing and accounting shared by both backends."""

    def __init__(self, nslaves: int, mailbox_bound: int = MAILBOX_BOUND):
        if nslaves < 1:
            raise ValueError("transport needs at least one slave")
        self.nslaves = nslaves
        self._outboxes = [queue.Queue(maxsize=mailbox_bound) for _ in range(nslaves)]
        self._inbox: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._m2s = 0
        self._s2m = 0
        self._bytes = 0
        self._handles = 0
        self._closed = [False] * nslaves

    # Backends override: turn a Message into a queue record and back,
    # returning the accounting delta for that transfer.
    def _pack(self, msg: Message):
        raise NotImplementedError

    def _unpack(self, record) -> Message:
        raise NotImplementedError

    def _account(self, to_slave: bool, byte_delta: int, handle_delta: int) -> None:
        with self._lock:
            if to_slave:
                self._m2s += 1
            else:
                self._s2m += 1
            self._bytes += byte_delta
            self._handles += handle_delta

    def _force_shutdown(self, worker: int) -> None:
        # Error-path cleanup: best-effort Shutdown that never blocks.
        if self._closed[worker]:
            return
        record, _, _ = self._pack(Message(MessageKind.SHUTDOWN))
        try:
            self._outboxes[worker].put_nowait(record)
        except queue.Full:
            pass
        self._closed[worker] = True

    def master_endpoint(self) -> "MasterEndpoint":
        return MasterEndpoint(self)

    def slave_endpoint(self, worker: int) -> "SlaveEndpoint":
        return SlaveEndpoint(self, worker)

    def stats(self) -> TransportStats:
        with self._lock:
            return TransportStats(self._m2s, self._s2m, self._bytes, self._handles)


class MasterEndpoint:
    def __init__(self, transport: _TransportBase):
        self._t = transport

    def send(self, to: Endpoint, msg: Message) -> None:
        if to.is_master:
            raise ValueError("master cannot send to itself")
        t = self._t
        if t._closed[to.worker]:
            raise ChannelClosedError(f"channel to slave {to.worker} is shut down")
        if msg.kind is MessageKind.CHUNK_ASSIGNMENT:
            if not msg.payload:
                raise ValueError("ChunkAssignment payload must be nonempty")
            if msg.chunk_seq is None:
                raise ValueError("ChunkAssignment needs a chunk_seq")
        record, byte_delta, handle_delta = t._pack(msg)
        t._outboxes[to.worker].put(record)
        t._account(True, byte_delta, handle_delta)
        if msg.kind is MessageKind.SHUTDOWN:
            t._closed[to.worker] = True

    def recv_any(self, block: bool = True,
                 timeout: Optional[float] = None) -> Optional[tuple[Endpoint, Message]]:
        try:
            worker, record = self._t._inbox.get(block=block, timeout=timeout)
        except queue.Empty:
            return None
        return Endpoint.slave(worker), self._t._unpack(record)


class SlaveEndpoint:
    """A slave's single channel, to the master; no slave-addressing API exists."""

    def __init__(self, transport: _TransportBase, worker: int):
        self._t = transport
        self.worker = worker
        self._closed = False

    def recv(self) -> Message:
        if self._closed:
            raise ChannelClosedError(f"slave {self.worker} channel is shut down")
        msg = self._t._unpack(self._t._outboxes[self.worker].get())
        if msg.kind is MessageKind.SHUTDOWN:
            self._closed = True
        return msg

    def reply(self, msg: Message) -> None:
        if self._closed:
            raise ChannelClosedError(f"slave {self.worker} channel is shut down")
        record, byte_delta, handle_delta = self._t._pack(msg)
        self._t._inbox.put((self.worker, record))
        self._t._account(False, byte_delta, handle_delta)


class MessagePassingTransport(_TransportBase):
    """Marshals every payload through the wire format (copying backend)."""

    name = "mp"

    def _pack(self, msg: Message):
        wire = serialize_terms(msg.payload)
        return (msg.kind, msg.chunk_seq, wire), len(wire), 0

    def _unpack(self, record) -> Message:
        kind, chunk_seq, wire = record
        return Message(kind, chunk_seq, deserialize_terms(wire))


class SharedBufferTransport(_TransportBase):
    """Transfers payload ownership by reference (zero-copy backend)."""

    name = "sm"

    def _pack(self, msg: Message):
        return msg, 0, 1

    def _unpack(self, record) -> Message:
        return record


BACKENDS = {
    "mp": MessagePassingTransport,
    "sm": SharedBufferTransport,
}


def make_transport(backend: str, nslaves: int,
                   mailbox_bound: int = MAILBOX_BOUND) -> _TransportBase:
    try:
        cls = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; expected one of {sorted(BACKENDS)}")
    return cls(nslaves, mailbox_bound)
