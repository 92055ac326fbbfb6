"""Session persistence and live fan-out.

One newline-delimited JSON log file per session plus a small meta file,
in a flat data directory. Appends go through a per-session lock, are
flushed line-by-line (optionally fsynced), mirrored in memory for reads,
and broadcast to bounded subscriber queues. A slow subscriber overflows
and is dropped; ingestion never blocks on it.
"""

from __future__ import annotations

import json
import os
import queue
import secrets
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

from ..codes import EventCode, WarningCode
from ..errors import (
    DeviceUnavailableError,
    NotFoundError,
    ParameterError,
    RejectedError,
    StorageError,
    ValidationError,
)
from ..records import KIND_EVENT, KIND_METRIC, KIND_REP, SessionEventRecord
from ..session.summary import summarize
from ..session.types import Regimen, SessionSummary

if TYPE_CHECKING:
    from .link import DeviceLink

CSV_HEADER = "t_ms,kind,spo2,rr,hr,rep_count,event,arg"

_EVENT_NAMES = {int(code): code.name.lower() for code in EventCode}


@dataclass
class SessionRecord:
    id: str
    created_at: str
    regimen: Regimen
    status: str  # "open" | "closed"
    device_label: str

    def to_meta(self, token_hex: str) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "regimen": {
                "sets": self.regimen.sets,
                "rest_s": self.regimen.rest_s,
                "start_level": self.regimen.start_level,
                "max_level": self.regimen.max_level,
            },
            "status": self.status,
            "device_label": self.device_label,
            "token": token_hex,
        }


class Subscription:
    """A bounded live feed of records appended after subscription."""

    _CLOSED = object()
    _OVERFLOW = object()

    def __init__(self, maxsize: int) -> None:
        self._queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self._dead = False
        self.overflowed = False
        self.closed = False

    def _publish(self, record: SessionEventRecord) -> None:
        if self._dead:
            return
        try:
            self._queue.put_nowait(record)
        except queue.Full:
            self._dead = True
            self.overflowed = True

    def _close(self) -> None:
        if not self._dead:
            self._dead = True
        try:
            self._queue.put_nowait(self._CLOSED)
        except queue.Full:
            pass

    def get(self, timeout: float | None = None):
        """Next record, or None on timeout. Raises OverflowError when dropped."""
        if self.overflowed and self._queue.empty():
            self.closed = True
            raise OverflowError("subscriber too slow; subscription dropped")
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            if self.overflowed:
                self.closed = True
                raise OverflowError("subscriber too slow; subscription dropped") from None
            return None
        if item is self._CLOSED:
            self.closed = True
            return None
        return item


class _SessionEntry:
    def __init__(self, record: SessionRecord, token: bytes, log_path: Path) -> None:
        self.record = record
        self.token = token
        self.log_path = log_path
        self.records: list[SessionEventRecord] = []
        self.lock = threading.Lock()
        self.subscribers: list[Subscription] = []
        self.link: "DeviceLink | None" = None
        self.fh = None


class SessionStore:
    def __init__(self, data_dir: str | Path, fsync: bool = False) -> None:
        self.data_dir = Path(data_dir)
        self.fsync = fsync
        self._lock = threading.RLock()
        self._sessions: dict[str, _SessionEntry] = {}
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create data dir {self.data_dir}: {exc}") from exc
        self._load_existing()

    # -- lifecycle ---------------------------------------------------------

    def _load_existing(self) -> None:
        for meta_path in sorted(self.data_dir.glob("*.meta.json")):
            try:
                meta = json.loads(meta_path.read_text())
                record = SessionRecord(
                    id=meta["id"],
                    created_at=meta["created_at"],
                    regimen=Regimen(**meta["regimen"]),
                    status=meta["status"],
                    device_label=meta.get("device_label", "device"),
                )
                token = bytes.fromhex(meta["token"])
            except (OSError, KeyError, ValueError, TypeError) as exc:
                raise StorageError(f"corrupt session meta {meta_path}: {exc}") from exc
            entry = _SessionEntry(record, token, self.data_dir / f"{record.id}.log")
            if entry.log_path.exists():
                with entry.log_path.open() as fh:
                    for line in fh:
                        line = line.strip()
                        if line:
                            entry.records.append(SessionEventRecord.from_json_line(line))
            self._sessions[record.id] = entry

    def create_session(self, regimen: Regimen | None = None,
                       device_label: str = "device",
                       token: bytes | None = None) -> tuple[SessionRecord, bytes]:
        """New open session. A caller-supplied 16-byte binding token makes
        the resulting log reproducible (hermetic runs); otherwise random."""
        regimen = regimen or Regimen()
        if not isinstance(regimen, Regimen):
            raise ValidationError("regimen must be a Regimen")
        session_id = uuid.uuid4().hex[:12]
        if token is None:
            token = secrets.token_bytes(16)
        elif len(token) != 16:
            raise ValidationError("binding token must be 16 bytes")
        record = SessionRecord(
            id=session_id,
            created_at=_utc_now(),
            regimen=regimen,
            status="open",
            device_label=device_label,
        )
        entry = _SessionEntry(record, token, self.data_dir / f"{session_id}.log")
        try:
            meta_path = self.data_dir / f"{session_id}.meta.json"
            meta_path.write_text(json.dumps(record.to_meta(token.hex()), sort_keys=True))
            entry.log_path.touch()
        except OSError as exc:
            raise StorageError(f"cannot create session files: {exc}") from exc
        with self._lock:
            self._sessions[session_id] = entry
        return record, token

    def close_session(self, session_id: str) -> None:
        entry = self._entry(session_id)
        with entry.lock:
            if entry.record.status == "closed":
                return
            entry.record.status = "closed"
            self._write_meta(entry)
            if entry.fh is not None:
                entry.fh.close()
                entry.fh = None
            for sub in entry.subscribers:
                sub._close()
            entry.subscribers.clear()

    def close(self) -> None:
        with self._lock:
            ids = list(self._sessions)
        for session_id in ids:
            entry = self._sessions[session_id]
            with entry.lock:
                if entry.fh is not None:
                    entry.fh.flush()
                    if self.fsync:
                        os.fsync(entry.fh.fileno())
                    entry.fh.close()
                    entry.fh = None
                for sub in entry.subscribers:
                    sub._close()
                entry.subscribers.clear()

    def _write_meta(self, entry: _SessionEntry) -> None:
        meta_path = self.data_dir / f"{entry.record.id}.meta.json"
        meta_path.write_text(json.dumps(entry.record.to_meta(entry.token.hex()), sort_keys=True))

    # -- lookups -------------------------------------------------------------

    def _entry(self, session_id: str) -> _SessionEntry:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise NotFoundError(f"no session {session_id!r}") from None

    def get(self, session_id: str) -> SessionRecord:
        return self._entry(session_id).record

    def token_for(self, session_id: str) -> bytes:
        return self._entry(session_id).token

    def list_sessions(self) -> list[SessionRecord]:
        with self._lock:
            return [e.record for e in self._sessions.values()]

    def bind_device(self, token: bytes) -> str:
        with self._lock:
            for entry in self._sessions.values():
                if entry.token == token:
                    if entry.record.status != "open":
                        raise RejectedError("session is closed")
                    return entry.record.id
        raise RejectedError("unknown binding token")

    # -- appends and reads -----------------------------------------------------

    def append(self, session_id: str, record: SessionEventRecord) -> None:
        entry = self._entry(session_id)
        with entry.lock:
            if entry.record.status != "open":
                raise RejectedError(f"session {session_id} is closed")
            if entry.fh is None:
                try:
                    entry.fh = entry.log_path.open("a")
                except OSError as exc:
                    raise StorageError(f"cannot open log: {exc}") from exc
            try:
                entry.fh.write(record.to_json_line() + "\n")
                entry.fh.flush()
                if self.fsync:
                    os.fsync(entry.fh.fileno())
            except OSError as exc:
                raise StorageError(f"append failed: {exc}") from exc
            entry.records.append(record)
            subscribers = list(entry.subscribers)
        for sub in subscribers:
            sub._publish(record)

    def records(self, session_id: str) -> list[SessionEventRecord]:
        entry = self._entry(session_id)
        with entry.lock:
            return list(entry.records)

    def metrics(self, session_id: str, from_ms: int | None = None,
                to_ms: int | None = None) -> list[SessionEventRecord]:
        if from_ms is not None and to_ms is not None and to_ms < from_ms:
            raise ParameterError("inverted time range")
        out = []
        for rec in self.records(session_id):
            if rec.kind != KIND_METRIC:
                continue
            if from_ms is not None and rec.t_ms < from_ms:
                continue
            if to_ms is not None and rec.t_ms >= to_ms:
                continue
            out.append(rec)
        return out

    def summary(self, session_id: str) -> SessionSummary:
        return summarize(self.records(session_id))

    # -- live fan-out ---------------------------------------------------------

    def subscribe(self, session_id: str, maxsize: int = 1024) -> Subscription:
        entry = self._entry(session_id)
        sub = Subscription(maxsize)
        with entry.lock:
            entry.subscribers.append(sub)
        return sub

    def unsubscribe(self, session_id: str, sub: Subscription) -> None:
        entry = self._entry(session_id)
        with entry.lock:
            if sub in entry.subscribers:
                entry.subscribers.remove(sub)

    # -- device command path ----------------------------------------------------

    def register_link(self, session_id: str, link: "DeviceLink") -> None:
        entry = self._entry(session_id)
        with entry.lock:
            entry.link = link

    def release_link(self, session_id: str, link: "DeviceLink") -> None:
        entry = self._entry(session_id)
        with entry.lock:
            if entry.link is link:
                entry.link = None

    def device_link(self, session_id: str) -> "DeviceLink":
        entry = self._entry(session_id)
        with entry.lock:
            if entry.link is None:
                raise DeviceUnavailableError(f"no device bound to session {session_id}")
            return entry.link

    def submit_command(self, session_id: str, command_code: int, arg: int = 0,
                       timeout: float = 2.0) -> int:
        """Forward a command frame to the bound device; returns the Ack status."""
        return self.device_link(session_id).send_command(command_code, arg, timeout=timeout)

    def submit_steering(self, session_id: str, field_name: str, value: float,
                        timeout: float = 2.0) -> int:
        return self.device_link(session_id).send_steering(field_name, value, timeout=timeout)

    # -- exports ---------------------------------------------------------------

    def export_csv(self, session_id: str) -> bytes:
        lines = [CSV_HEADER]
        for rec in self.records(session_id):
            if rec.kind == KIND_METRIC:
                lines.append(
                    "%d,metric,%s,%s,%s,%s,," % (
                        rec.t_ms,
                        _tenth(rec.payload.get("spo2")),
                        _tenth(rec.payload.get("rr")),
                        _tenth(rec.payload.get("hr")),
                        _intfield(rec.payload.get("rep_count")),
                    )
                )
            elif rec.kind == KIND_REP:
                lines.append("%d,rep,,,,,," % rec.t_ms)
            elif rec.kind == KIND_EVENT:
                code = rec.payload.get("code")
                name = _EVENT_NAMES.get(code, str(code))
                lines.append(
                    "%d,event,,,,,%s,%s" % (rec.t_ms, name, _intfield(rec.payload.get("arg")))
                )
        return ("\n".join(lines) + "\n").encode()

    def clinician_report(self, session_id: str) -> dict:
        """Summary plus per-minute vitals aggregates and the warning list."""
        records = self.records(session_id)
        summary = summarize(records)
        minutes: dict[int, dict[str, list[float]]] = {}
        warnings = []
        for rec in records:
            if rec.kind == KIND_METRIC:
                minute = rec.t_ms // 60000
                bucket = minutes.setdefault(minute, {"spo2": [], "rr": [], "hr": []})
                for key in ("spo2", "rr", "hr"):
                    value = rec.payload.get(key)
                    if value is not None:
                        bucket[key].append(value)
            elif rec.kind == KIND_EVENT and rec.payload.get("code") == int(EventCode.WARNING):
                arg = rec.payload.get("arg", 0)
                try:
                    name = WarningCode(arg).name.lower()
                except ValueError:
                    name = str(arg)
                warnings.append({"t_ms": rec.t_ms, "code": arg, "name": name})
        per_minute = []
        for minute in sorted(minutes):
            row: dict = {"minute": minute}
            for key, values in minutes[minute].items():
                if values:
                    row[key] = {
                        "min": min(values),
                        "mean": sum(values) / len(values),
                        "max": max(values),
                    }
                else:
                    row[key] = None
            per_minute.append(row)
        return {
            "session_id": session_id,
            "summary": summary_to_dict(summary),
            "per_minute": per_minute,
            "warnings": warnings,
        }


def summary_to_dict(summary: SessionSummary) -> dict:
    return {
        "total_reps": summary.total_reps,
        "sets_completed": summary.sets_completed,
        "min_spo2": summary.min_spo2,
        "max_rr": summary.max_rr,
        "mean_hr": summary.mean_hr,
        "warnings": summary.warnings,
        "level_trajectory": summary.level_trajectory,
        "duration_s": summary.duration_s,
        "outcome": summary.outcome,
    }


def _tenth(value) -> str:
    return "" if value is None else f"{value:.1f}"


def _intfield(value) -> str:
    return "" if value is None else str(int(value))


def _utc_now() -> str:
    import datetime

    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def records_from_lines(lines: Iterable[str]) -> list[SessionEventRecord]:
    return [SessionEventRecord.from_json_line(ln) for ln in lines if ln.strip()]
