"""Build a SessionSummary purely from a persisted event log.

The summary is a fold over records; re-reading the same log always
reproduces the same summary, which is what the host serves for queries.
"""

from __future__ import annotations

from typing import Iterable

from ..codes import EventCode
from ..errors import LogError
from ..records import KIND_EVENT, KIND_METRIC, KIND_REP, SessionEventRecord
from .types import SessionSummary


def summarize(records: Iterable[SessionEventRecord]) -> SessionSummary:
    records = list(records)
    if not records:
        raise LogError("empty log")
    first = records[0]
    if first.kind != KIND_EVENT or first.payload.get("code") != int(EventCode.SESSION_START):
        raise LogError("log does not begin with SessionStart")

    summary = SessionSummary()
    hr_total = 0.0
    hr_count = 0
    for rec in records:
        if rec.kind == KIND_REP:
            summary.total_reps += 1
        elif rec.kind == KIND_METRIC:
            spo2 = rec.payload.get("spo2")
            if spo2 is not None and (summary.min_spo2 is None or spo2 < summary.min_spo2):
                summary.min_spo2 = spo2
            rr = rec.payload.get("rr")
            if rr is not None and (summary.max_rr is None or rr > summary.max_rr):
                summary.max_rr = rr
            hr = rec.payload.get("hr")
            if hr is not None:
                hr_total += hr
                hr_count += 1
        elif rec.kind == KIND_EVENT:
            code = rec.payload.get("code")
            if code == int(EventCode.SET_END):
                summary.sets_completed += 1
            elif code == int(EventCode.WARNING):
                summary.warnings += 1
            elif code == int(EventCode.INTENSITY_CHANGED):
                summary.level_trajectory.append(int(rec.payload.get("arg", 0)))
            elif code == int(EventCode.COMPLETED):
                summary.outcome = "completed"
            elif code == int(EventCode.ABORTED):
                summary.outcome = "aborted"
    if hr_count:
        summary.mean_hr = hr_total / hr_count
    summary.duration_s = (records[-1].t_ms - records[0].t_ms) / 1000.0
    return summary
