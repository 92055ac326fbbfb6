"""Session event log records: the append-only unit of persistence.

One record per decoded telemetry frame (or per synthesized diagnostic such
as a sequence gap). Records serialize to single NDJSON lines with sorted
keys so a given log is byte-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

KIND_RAW = "raw"
KIND_METRIC = "metric"
KIND_REP = "rep"
KIND_EVENT = "event"
KIND_GAP = "gap"

_KINDS = {KIND_RAW, KIND_METRIC, KIND_REP, KIND_EVENT, KIND_GAP}


@dataclass(frozen=True)
class SessionEventRecord:
    t_ms: int
    recv_seq: int | None
    kind: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown record kind {self.kind!r}")

    def to_json_line(self) -> str:
        obj = {
            "t_ms": self.t_ms,
            "recv_seq": self.recv_seq,
            "kind": self.kind,
            "payload": self.payload,
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "SessionEventRecord":
        obj = json.loads(line)
        return cls(
            t_ms=obj["t_ms"],
            recv_seq=obj.get("recv_seq"),
            kind=obj["kind"],
            payload=obj.get("payload", {}),
        )
