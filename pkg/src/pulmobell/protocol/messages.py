"""Telemetry message variants and their payload layouts.

All multi-byte integers are little-endian. Batch messages carry a sample
count byte `n` that must match the remaining payload length exactly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import ClassVar, Union

from ..errors import EncodeError, ParseError, UnknownTypeError

MSG_ACCEL_BATCH = 0x01
MSG_PPG_BATCH = 0x02
MSG_AIR_QUALITY = 0x03
MSG_DERIVED_METRICS = 0x04
MSG_SESSION_EVENT = 0x05
MSG_COMMAND = 0x10
MSG_ACK = 0x11
MSG_STEERING = 0x12


@dataclass(frozen=True)
class AccelBatch:
    msg_type: ClassVar[int] = MSG_ACCEL_BATCH
    t0_ms: int
    dt_us: int
    samples: tuple[tuple[int, int, int], ...]  # (x, y, z) in signed milli-g


@dataclass(frozen=True)
class PpgBatch:
    msg_type: ClassVar[int] = MSG_PPG_BATCH
    t0_ms: int
    dt_us: int
    samples: tuple[tuple[int, int], ...]  # (red, ir) ADC counts


@dataclass(frozen=True)
class AirQuality:
    msg_type: ClassVar[int] = MSG_AIR_QUALITY
    t_ms: int
    pm25_tenths: int
    pm10_tenths: int


@dataclass(frozen=True)
class DerivedMetrics:
    msg_type: ClassVar[int] = MSG_DERIVED_METRICS
    t_ms: int
    spo2_tenths: int
    rr_tenths: int
    hr_tenths: int
    rep_count: int
    quality_flags: int


@dataclass(frozen=True)
class SessionEvent:
    msg_type: ClassVar[int] = MSG_SESSION_EVENT
    t_ms: int
    event_code: int
    arg: int


@dataclass(frozen=True)
class Command:
    msg_type: ClassVar[int] = MSG_COMMAND
    command_code: int
    arg: int


@dataclass(frozen=True)
class Ack:
    msg_type: ClassVar[int] = MSG_ACK
    acked_seq: int
    status: int


@dataclass(frozen=True)
class Steering:
    msg_type: ClassVar[int] = MSG_STEERING
    field_code: int
    value_milli: int  # signed, field value scaled by 1000


Message = Union[
    AccelBatch, PpgBatch, AirQuality, DerivedMetrics, SessionEvent, Command, Ack, Steering
]


def serialize_payload(m: Message) -> bytes:
    try:
        if isinstance(m, AccelBatch):
            head = struct.pack("<IHB", m.t0_ms, m.dt_us, len(m.samples))
            body = b"".join(struct.pack("<hhh", x, y, z) for x, y, z in m.samples)
            return head + body
        if isinstance(m, PpgBatch):
            head = struct.pack("<IHB", m.t0_ms, m.dt_us, len(m.samples))
            body = b"".join(struct.pack("<HH", red, ir) for red, ir in m.samples)
            return head + body
        if isinstance(m, AirQuality):
            return struct.pack("<IHH", m.t_ms, m.pm25_tenths, m.pm10_tenths)
        if isinstance(m, DerivedMetrics):
            return struct.pack(
                "<IHHHHB",
                m.t_ms,
                m.spo2_tenths,
                m.rr_tenths,
                m.hr_tenths,
                m.rep_count,
                m.quality_flags,
            )
        if isinstance(m, SessionEvent):
            return struct.pack("<IBH", m.t_ms, m.event_code, m.arg)
        if isinstance(m, Command):
            return struct.pack("<BH", m.command_code, m.arg)
        if isinstance(m, Ack):
            return struct.pack("<HB", m.acked_seq, m.status)
        if isinstance(m, Steering):
            return struct.pack("<Bi", m.field_code, m.value_milli)
    except struct.error as exc:
        raise EncodeError(f"cannot serialize {type(m).__name__}: {exc}") from exc
    raise EncodeError(f"not a message: {m!r}")


def _unpack_exact(fmt: str, data: bytes, what: str):
    if len(data) != struct.calcsize(fmt):
        raise ParseError(f"{what}: expected {struct.calcsize(fmt)} bytes, got {len(data)}")
    return struct.unpack(fmt, data)


def parse_payload(msg_type: int, data: bytes) -> Message:
    if msg_type == MSG_ACCEL_BATCH:
        if len(data) < 7:
            raise ParseError("accel batch: truncated header")
        t0_ms, dt_us, n = struct.unpack("<IHB", data[:7])
        if len(data) != 7 + 6 * n:
            raise ParseError(f"accel batch: n={n} but payload length {len(data)}")
        samples = tuple(struct.iter_unpack("<hhh", data[7:]))
        return AccelBatch(t0_ms=t0_ms, dt_us=dt_us, samples=samples)
    if msg_type == MSG_PPG_BATCH:
        if len(data) < 7:
            raise ParseError("ppg batch: truncated header")
        t0_ms, dt_us, n = struct.unpack("<IHB", data[:7])
        if len(data) != 7 + 4 * n:
            raise ParseError(f"ppg batch: n={n} but payload length {len(data)}")
        samples = tuple(struct.iter_unpack("<HH", data[7:]))
        return PpgBatch(t0_ms=t0_ms, dt_us=dt_us, samples=samples)
    if msg_type == MSG_AIR_QUALITY:
        t_ms, pm25, pm10 = _unpack_exact("<IHH", data, "air quality")
        return AirQuality(t_ms=t_ms, pm25_tenths=pm25, pm10_tenths=pm10)
    if msg_type == MSG_DERIVED_METRICS:
        t_ms, spo2, rr, hr, reps, flags = _unpack_exact("<IHHHHB", data, "derived metrics")
        return DerivedMetrics(
            t_ms=t_ms,
            spo2_tenths=spo2,
            rr_tenths=rr,
            hr_tenths=hr,
            rep_count=reps,
            quality_flags=flags,
        )
    if msg_type == MSG_SESSION_EVENT:
        t_ms, code, arg = _unpack_exact("<IBH", data, "session event")
        return SessionEvent(t_ms=t_ms, event_code=code, arg=arg)
    if msg_type == MSG_COMMAND:
        code, arg = _unpack_exact("<BH", data, "command")
        return Command(command_code=code, arg=arg)
    if msg_type == MSG_ACK:
        acked, status = _unpack_exact("<HB", data, "ack")
        return Ack(acked_seq=acked, status=status)
    if msg_type == MSG_STEERING:
        field_code, value = _unpack_exact("<Bi", data, "steering")
        return Steering(field_code=field_code, value_milli=value)
    raise UnknownTypeError(f"unknown msg_type 0x{msg_type:02X}")
