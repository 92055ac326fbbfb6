"""Per-connection device ingest: binding handshake, decode, append, command.

Wire contract: the first 16 bytes of a device stream are the session
binding token issued at creation; framing starts immediately after, and
the first frame must be a SessionStart event whose arg echoes the low 16
bits of that token. Frames then map to log records; sequence gaps insert
GapDetected records; CRC failures only bump connection diagnostics.
"""

from __future__ import annotations

import threading

from ..codes import EventCode, QUALITY_VALID, unpack_quality_flags
from ..errors import DeviceUnavailableError, RejectedError
from ..protocol.framing import Decoder, encode_frame, token_low16
from ..protocol.messages import (
    AccelBatch,
    Ack,
    AirQuality,
    Command,
    DerivedMetrics,
    PpgBatch,
    SessionEvent,
    Steering,
)
from ..records import (
    KIND_EVENT,
    KIND_GAP,
    KIND_METRIC,
    KIND_RAW,
    KIND_REP,
    SessionEventRecord,
)

TOKEN_LEN = 16

_EVENT_NAMES = {int(code): code.name.lower() for code in EventCode}


class DeviceLink:
    """One device connection bound to one open session."""

    def __init__(self, store, send_fn=None) -> None:
        self._store = store
        self._send_fn = send_fn
        self._decoder = Decoder()
        self._token_buf = bytearray()
        self.session_id: str | None = None
        self._bound_frame_seen = False
        self._expected_seq: int | None = None
        self._out_seq = 0
        self._out_lock = threading.Lock()
        self._acks: dict[int, tuple[threading.Event, list[int]]] = {}
        self.crc_failures = 0
        self.frames_ingested = 0

    # -- inbound -----------------------------------------------------------

    def feed(self, data: bytes) -> int:
        """Ingest raw bytes; returns the number of records appended."""
        if self.session_id is None:
            self._token_buf.extend(data)
            if len(self._token_buf) < TOKEN_LEN:
                return 0
            token = bytes(self._token_buf[:TOKEN_LEN])
            rest = bytes(self._token_buf[TOKEN_LEN:])
            self._token_buf.clear()
            self.session_id = self._store.bind_device(token)  # raises RejectedError
            self._token = token
            self._store.register_link(self.session_id, self)
            data = rest
            if not data:
                return 0
        frames = self._decoder.feed(data)
        self.crc_failures = self._decoder.crc_failures
        appended = 0
        for message, seq in frames:
            appended += self._handle_frame(message, seq)
        return appended

    def _handle_frame(self, message, seq: int) -> int:
        if not self._bound_frame_seen:
            if not (
                isinstance(message, SessionEvent)
                and message.event_code == int(EventCode.SESSION_START)
                and message.arg == token_low16(self._token)
            ):
                raise RejectedError("first frame must be the binding SessionStart")
            self._bound_frame_seen = True
        appended = 0
        if self._expected_seq is not None and seq != self._expected_seq:
            missing = (seq - self._expected_seq) & 0xFFFF
            t_ms = getattr(message, "t_ms", getattr(message, "t0_ms", 0))
            self._append(
                SessionEventRecord(
                    t_ms=t_ms,
                    recv_seq=seq,
                    kind=KIND_GAP,
                    payload={"missing": missing},
                )
            )
            appended += 1
        self._expected_seq = (seq + 1) & 0xFFFF

        record = self._record_for(message, seq)
        if record is not None:
            self._append(record)
            appended += 1
        self.frames_ingested += 1
        return appended

    def _append(self, record: SessionEventRecord) -> None:
        assert self.session_id is not None
        self._store.append(self.session_id, record)

    def _record_for(self, message, seq: int) -> SessionEventRecord | None:
        if isinstance(message, SessionEvent):
            if message.event_code == int(EventCode.REP):
                return SessionEventRecord(
                    t_ms=message.t_ms,
                    recv_seq=seq,
                    kind=KIND_REP,
                    payload={"arg": message.arg},
                )
            return SessionEventRecord(
                t_ms=message.t_ms,
                recv_seq=seq,
                kind=KIND_EVENT,
                payload={
                    "code": message.event_code,
                    "name": _EVENT_NAMES.get(message.event_code, str(message.event_code)),
                    "arg": message.arg,
                },
            )
        if isinstance(message, DerivedMetrics):
            spo2_q, rr_q, hr_q = unpack_quality_flags(message.quality_flags)
            payload: dict = {
                "flags": message.quality_flags,
                "rep_count": message.rep_count,
            }
            if spo2_q == QUALITY_VALID:
                payload["spo2"] = message.spo2_tenths / 10.0
            if rr_q == QUALITY_VALID:
                payload["rr"] = message.rr_tenths / 10.0
            if hr_q == QUALITY_VALID:
                payload["hr"] = message.hr_tenths / 10.0
            return SessionEventRecord(
                t_ms=message.t_ms, recv_seq=seq, kind=KIND_METRIC, payload=payload
            )
        if isinstance(message, AirQuality):
            return SessionEventRecord(
                t_ms=message.t_ms,
                recv_seq=seq,
                kind=KIND_RAW,
                payload={
                    "msg_type": message.msg_type,
                    "pm25": message.pm25_tenths / 10.0,
                    "pm10": message.pm10_tenths / 10.0,
                },
            )
        if isinstance(message, AccelBatch):
            return SessionEventRecord(
                t_ms=message.t0_ms,
                recv_seq=seq,
                kind=KIND_RAW,
                payload={
                    "msg_type": message.msg_type,
                    "t0_ms": message.t0_ms,
                    "dt_us": message.dt_us,
                    "n": len(message.samples),
                    "xyz": [list(s) for s in message.samples],
                },
            )
        if isinstance(message, PpgBatch):
            return SessionEventRecord(
                t_ms=message.t0_ms,
                recv_seq=seq,
                kind=KIND_RAW,
                payload={
                    "msg_type": message.msg_type,
                    "t0_ms": message.t0_ms,
                    "dt_us": message.dt_us,
                    "n": len(message.samples),
                    "red_ir": [list(s) for s in message.samples],
                },
            )
        if isinstance(message, Ack):
            self._resolve_ack(message)
            return None
        return None  # Command/Steering frames never originate from devices

    # -- outbound commands ----------------------------------------------------

    def _resolve_ack(self, ack: Ack) -> None:
        waiter = self._acks.pop(ack.acked_seq, None)
        if waiter is not None:
            event, slot = waiter
            slot.append(ack.status)
            event.set()

    def _send_and_wait(self, message, timeout: float) -> int:
        if self._send_fn is None:
            raise DeviceUnavailableError("link has no outbound channel")
        with self._out_lock:
            seq = self._out_seq
            self._out_seq = (self._out_seq + 1) & 0xFFFF
            event = threading.Event()
            slot: list[int] = []
            self._acks[seq] = (event, slot)
            frame = encode_frame(message, seq)
        self._send_fn(frame)
        if not event.wait(timeout):
            self._acks.pop(seq, None)
            raise DeviceUnavailableError("device did not acknowledge in time")
        return slot[0]

    def send_command(self, command_code: int, arg: int = 0, timeout: float = 2.0) -> int:
        return self._send_and_wait(Command(command_code=command_code, arg=arg), timeout)

    def send_steering(self, field_name: str, value: float, timeout: float = 2.0) -> int:
        from ..codes import STEER_FIELD_BY_NAME

        try:
            field_code = STEER_FIELD_BY_NAME[field_name]
        except KeyError:
            raise DeviceUnavailableError(f"unknown steering field {field_name!r}") from None
        return self._send_and_wait(
            Steering(field_code=int(field_code), value_milli=int(round(value * 1000.0))),
            timeout,
        )

    def close(self) -> None:
        if self.session_id is not None:
            self._store.release_link(self.session_id, self)
