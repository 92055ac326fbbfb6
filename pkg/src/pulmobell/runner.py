"""Hermetic single-process runs: host store + simulator over an in-process pipe.

Everything happens on one thread under the accelerated clock, so a run is
fully deterministic in the scenario seed: same scenario, byte-identical
session log and CSV export.
"""

from __future__ import annotations

import hashlib
import shutil
from dataclasses import dataclass
from pathlib import Path

from .codes import WarningCode
from .host.link import DeviceLink
from .host.store import SessionStore, summary_to_dict
from .session.types import SessionSummary
from .sim.device import DeviceRunReport, DeviceSimulator
from .sim.profiles import ScenarioScript
from .transport import CallbackPipe

LOG_NAME = "session.log"
CSV_NAME = "export.csv"
REPORT_NAME = "report.txt"


@dataclass
class RunOutcome:
    session_id: str
    report: DeviceRunReport
    summary: SessionSummary
    log_path: Path | None
    csv_path: Path | None
    report_path: Path | None


def run_scenario(
    scenario: ScenarioScript,
    out_dir: str | Path | None = None,
    data_dir: str | Path | None = None,
) -> RunOutcome:
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)
    if data_dir is None:
        if out_path is None:
            raise ValueError("need out_dir or data_dir")
        data_dir = out_path / "data"

    store = SessionStore(data_dir)
    # seed-derived binding token keeps the log byte-reproducible
    run_token = hashlib.sha256(f"pulmobell-run:{scenario.seed}".encode()).digest()[:16]
    record, token = store.create_session(
        scenario.regimen, device_label=scenario.device_label, token=run_token
    )

    link = DeviceLink(store, send_fn=None)
    pipe = CallbackPipe(on_send=link.feed)
    link._send_fn = pipe.feed_back  # host->device bytes loop straight back

    sim = DeviceSimulator(scenario, pipe, clock="accelerated", token=token)
    report = sim.run()
    summary = store.summary(record.id)
    store.close_session(record.id)
    csv_bytes = store.export_csv(record.id)
    store.close()

    log_path = csv_path = report_path = None
    if out_path is not None:
        log_path = out_path / LOG_NAME
        shutil.copyfile(store.data_dir / f"{record.id}.log", log_path)
        csv_path = out_path / CSV_NAME
        csv_path.write_bytes(csv_bytes)
        report_path = out_path / REPORT_NAME
        report_path.write_text(format_report(report, summary))
    return RunOutcome(
        session_id=record.id,
        report=report,
        summary=summary,
        log_path=log_path,
        csv_path=csv_path,
        report_path=report_path,
    )


def format_report(report: DeviceRunReport, summary: SessionSummary) -> str:
    """Deterministic human-readable run digest (no ids, no wall-clock times)."""
    lines = [
        f"outcome: {summary.outcome}",
        f"reps {report.counted_reps}/{report.truth_reps_total}",
    ]
    if report.outcome != summary.outcome:
        # why the run stopped when the log itself is not terminal
        lines.insert(1, f"run_outcome: {report.outcome}")
    lines += [
        f"sets_completed: {summary.sets_completed}",
        f"duration_s: {summary.duration_s:.1f}",
        f"warnings: {summary.warnings}",
        f"level_trajectory: {summary.level_trajectory}",
    ]
    if summary.min_spo2 is not None:
        lines.append(f"min_spo2: {summary.min_spo2:.1f}")
    if summary.max_rr is not None:
        lines.append(f"max_rr: {summary.max_rr:.1f}")
    if summary.mean_hr is not None:
        lines.append(f"mean_hr: {summary.mean_hr:.1f}")
    for entry in report.sets:
        lines.append(
            f"set {entry['set']}: counted {entry['counted_reps']} truth {entry['truth_reps']}"
        )
    warn_names = []
    for n in report.notifications:
        if n["kind"] != "notify":
            continue
        try:
            warn_names.append(WarningCode(n["arg"]).name.lower())
        except ValueError:
            warn_names.append(str(n["arg"]))
    if warn_names:
        lines.append("warnings_list: " + ", ".join(warn_names))
    if report.transport_error:
        lines.append(f"transport_error: {report.transport_error}")
    return "\n".join(lines) + "\n"


def summary_dict(summary: SessionSummary) -> dict:
    return summary_to_dict(summary)
