"""The simulated PulmoBell device: sensors, DSP, session control, telemetry.

One instance drives a whole run as a 100 Hz tick loop (10 ms simulated
per tick): it synthesizes sensor samples, feeds the repetition counter
and the session machine, batches raw telemetry, computes derived metrics
once per second, and answers host commands. Under the accelerated clock
and a fixed seed the emitted frame sequence is byte-identical between
runs.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from ..codes import (
    CommandCode,
    EventCode,
    QUALITY_DEGRADED,
    QUALITY_MISSING,
    QUALITY_OUT_OF_RANGE,
    QUALITY_VALID,
    SteerField,
    pack_quality_flags,
)
from ..dsp.rep_counter import RepCounter
from ..dsp.types import PpgWindow, Quality, VitalsReading
from ..dsp.vitals import (
    RR_WINDOW_S,
    SPO2_WINDOW_S,
    hr_from_window,
    rr_from_window,
    spo2_from_window,
)
from ..errors import SteeringError, TransportError
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
from ..session.controller import SessionMachine, SessionEventOut
from ..session.types import AirQualitySample, Phase, Tick, UserCommand
from .generators import ACCEL_FS_HZ, PPG_FS_HZ, AccelSource, PpgSource
from .profiles import ScenarioScript, SteeringCommand, apply_change

TICK_MS = 10
TICKS_PER_SECOND = 100
BATCH_TICKS = 50            # 0.5 s raw batches
METRICS_TICKS = 100         # 1 s derived metrics
AIR_TICKS = 1000            # 10 s air quality cadence
TERMINAL_GRACE_S = 2.0
REFUSED_LINGER_S = 10.0


@dataclass
class DeviceRunReport:
    outcome: str = "idle"
    counted_reps: int = 0
    truth_reps_total: int = 0
    sets: list[dict] = dataclass_field(default_factory=list)
    vitals_targets: list[dict] = dataclass_field(default_factory=list)
    steering_applied: list[dict] = dataclass_field(default_factory=list)
    notifications: list[dict] = dataclass_field(default_factory=list)
    events: list[dict] = dataclass_field(default_factory=list)
    frames_sent: int = 0
    duration_s: float = 0.0
    transport_error: str | None = None

    def truth_reps_for_set(self, index: int) -> int:
        for entry in self.sets:
            if entry["set"] == index:
                return entry["truth_reps"]
        return 0


_STEER_FIELD_NAMES = {f: f.name.lower() for f in SteerField}


class DeviceSimulator:
    def __init__(
        self,
        scenario: ScenarioScript,
        transport,
        clock: str = "accelerated",
        token: bytes | None = None,
    ) -> None:
        scenario.validate()
        if clock not in ("accelerated", "real"):
            raise ValueError(f"clock must be 'accelerated' or 'real', not {clock!r}")
        self.scenario = scenario
        self.transport = transport
        self.clock = clock
        self.token = token
        self._rng = np.random.default_rng(scenario.seed)
        self._physio = scenario.physio
        self._effort = scenario.effort
        self._air = scenario.air
        self._ppg = PpgSource(self._physio, self._rng)
        self._accel = AccelSource(self._effort, self._rng)
        self._reps = RepCounter()
        self.machine = SessionMachine(scenario.regimen)
        self._decoder = Decoder()
        self._seq = 0
        self._steering_lock = threading.Lock()
        self._steering_queue: list[SteeringCommand] = []
        self._pending_timeline = list(scenario.timeline)
        self._ppg_buf: list[tuple[int, int, int]] = []  # (t_ms, red, ir)
        self._accel_batch: list[tuple[int, int, int]] = []
        self._ppg_batch: list[tuple[int, int]] = []
        self._accel_batch_t0 = 0
        self._ppg_batch_t0 = 0
        self._latest_metrics: DerivedMetrics | None = None
        self._start_attempted = False
        self._refused_at_ms: int | None = None
        self._terminal_at_ms: int | None = None
        self._counted_by_set: dict[int, int] = {}
        self.report = DeviceRunReport()
        self.report.vitals_targets.append(self._targets_snapshot(0.0))

    # -- public control ----------------------------------------------------

    def apply_steering(self, cmd: SteeringCommand) -> None:
        """Queue a live field change; validation happens immediately.

        Raises SteeringError (state unchanged) for out-of-range values.
        """
        with self._steering_lock:
            apply_change(self._physio, self._effort, self._air, cmd.field, cmd.value)
            self._steering_queue.append(cmd)

    # -- frame plumbing ----------------------------------------------------

    def _send(self, message) -> None:
        frame = encode_frame(message, self._seq)
        self._seq = (self._seq + 1) & 0xFFFF
        self.transport.send(frame)
        self.report.frames_sent += 1

    def _emit_events(self, events: list[SessionEventOut]) -> None:
        for ev in events:
            self.report.events.append({"t_ms": ev.t_ms, "code": int(ev.code), "arg": int(ev.arg)})
            if ev.code is EventCode.REP:
                self._counted_by_set[self.machine.set_index] = ev.arg
            self._send(SessionEvent(t_ms=ev.t_ms, event_code=int(ev.code), arg=ev.arg))

    def _step_machine(self, inp) -> None:
        result = self.machine.step(inp)
        self._emit_events(result.events)
        for command in result.commands:
            self.report.notifications.append(
                {"t_ms": self.machine.last_t_ms, "kind": command.kind.value, "arg": command.arg}
            )

    # -- tick phases ---------------------------------------------------------

    def _targets_snapshot(self, t_s: float) -> dict:
        return {
            "t_s": t_s,
            "spo2_target": self._physio.spo2_target,
            "hr_bpm": self._physio.hr_bpm,
            "resp_freq_hz": self._physio.resp_freq_hz,
            "resp_mod_depth": self._physio.resp_mod_depth,
            "rep_period_s": self._effort.rep_period_s,
            "pm25": self._air.pm25,
            "pm10": self._air.pm10,
        }

    def _apply_field_change(self, field_name: str, value: float, t_ms: int, origin: str) -> None:
        self._physio, self._effort, self._air = apply_change(
            self._physio, self._effort, self._air, field_name, value
        )
        self._ppg.set_physio(self._physio)
        self._accel.set_effort(self._effort)
        entry = {"t_s": t_ms / 1000.0, "field": field_name, "value": value, "origin": origin}
        self.report.steering_applied.append(entry)
        self.report.vitals_targets.append(self._targets_snapshot(t_ms / 1000.0))

    def _apply_due_changes(self, t_ms: int) -> None:
        while self._pending_timeline and self._pending_timeline[0].t_s * 1000.0 <= t_ms:
            change = self._pending_timeline.pop(0)
            self._apply_field_change(change.field, change.value, t_ms, "timeline")
        with self._steering_lock:
            queued, self._steering_queue = self._steering_queue, []
        for cmd in queued:
            try:
                self._apply_field_change(cmd.field, cmd.value, t_ms, "steering")
            except SteeringError:
                pass  # raced with a conflicting change; already validated once

    def _handle_inbound(self, t_ms: int) -> None:
        data = self.transport.recv_available()
        if not data:
            return
        for message, seq in self._decoder.feed(data):
            if isinstance(message, Command):
                status = self._handle_command(message, t_ms)
                self._send(Ack(acked_seq=seq, status=status))
            elif isinstance(message, Steering):
                try:
                    name = _STEER_FIELD_NAMES[SteerField(message.field_code)]
                    self._apply_field_change(name, message.value_milli / 1000.0, t_ms, "steering")
                    status = 0
                except (ValueError, SteeringError):
                    status = 1
                self._send(Ack(acked_seq=seq, status=status))
            # anything else from the host is ignored

    def _handle_command(self, message: Command, t_ms: int) -> int:
        try:
            code = CommandCode(message.command_code)
        except ValueError:
            return 1
        if code is CommandCode.REQUEST_STATUS:
            if self._latest_metrics is not None:
                self._send(self._latest_metrics)
            return 0
        result = self.machine.step(UserCommand(command=code, arg=message.arg, t_ms=t_ms))
        self._emit_events(result.events)
        return 1 if (result.diagnostics and not result.events) else 0

    def _auto_start(self, t_ms: int) -> None:
        if not self.scenario.auto_start or self.machine.phase is not Phase.IDLE:
            return
        if self.machine.air_band is None:
            return
        if self._start_attempted and self.machine.start_refused:
            # retry only once breathable air shows up
            from ..session.types import AirBand

            if self.machine.air_band is AirBand.POOR:
                return
        elif self._start_attempted:
            return
        self._start_attempted = True
        self._step_machine(UserCommand(command=CommandCode.START, t_ms=t_ms))
        if self.machine.start_refused:
            self._refused_at_ms = t_ms

    def _compute_metrics(self, t_ms: int) -> tuple[DerivedMetrics, list[VitalsReading]]:
        fs = PPG_FS_HZ
        readings: list[VitalsReading] = []
        qualities = {"spo2": QUALITY_MISSING, "rr": QUALITY_MISSING, "hr": QUALITY_MISSING}
        tenths = {"spo2": 0, "rr": 0, "hr": 0}

        def window(last_s: float) -> PpgWindow | None:
            n = int(last_s * fs)
            if len(self._ppg_buf) < n:
                return None
            tail = self._ppg_buf[-n:]
            return PpgWindow(
                t_ms=[s[0] for s in tail],
                red=[s[1] for s in tail],
                ir=[s[2] for s in tail],
                fs_hz=fs,
            )

        def grade(reading: VitalsReading) -> int:
            if reading.quality is Quality.VALID:
                return QUALITY_VALID
            if reading.quality is Quality.OUT_OF_RANGE:
                return QUALITY_OUT_OF_RANGE
            return QUALITY_DEGRADED

        w_short = window(SPO2_WINDOW_S)
        if w_short is not None:
            spo2 = spo2_from_window(w_short)
            readings.append(spo2)
            qualities["spo2"] = grade(spo2)
            if not math.isnan(spo2.value):
                tenths["spo2"] = int(round(spo2.value * 10.0))
        w_long = window(RR_WINDOW_S)
        if w_long is not None:
            rr = rr_from_window(w_long)
            readings.append(rr)
            qualities["rr"] = grade(rr)
            if not math.isnan(rr.value):
                tenths["rr"] = int(round(rr.value * 10.0))
        if w_short is not None:
            hr = hr_from_window(w_short)
            readings.append(hr)
            qualities["hr"] = grade(hr)
            if not math.isnan(hr.value):
                tenths["hr"] = int(round(hr.value * 10.0))

        metrics = DerivedMetrics(
            t_ms=t_ms,
            spo2_tenths=tenths["spo2"],
            rr_tenths=tenths["rr"],
            hr_tenths=tenths["hr"],
            rep_count=self.machine.total_reps,
            quality_flags=pack_quality_flags(qualities["spo2"], qualities["rr"], qualities["hr"]),
        )
        return metrics, readings

    # -- main loop -----------------------------------------------------------

    def run(self) -> DeviceRunReport:
        try:
            return self._run()
        except TransportError as exc:
            self.report.transport_error = str(exc)
            self.report.outcome = "transport_error"
            return self._finalize()

    def _run(self) -> DeviceRunReport:
        if self.token is not None:
            self.transport.send(bytes(self.token))
            self._send(SessionEvent(t_ms=0, event_code=int(EventCode.SESSION_START),
                                    arg=token_low16(self.token)))
        max_ticks = int(self.scenario.max_s * TICKS_PER_SECOND)
        wall_start = time.monotonic()
        tick = 0
        while tick <= max_ticks:
            t_ms = tick * TICK_MS
            if self.clock == "real":
                deadline = wall_start + tick * TICK_MS / 1000.0
                delay = deadline - time.monotonic()
                if delay > 0:
                    time.sleep(delay)

            self._apply_due_changes(t_ms)
            self._handle_inbound(t_ms)

            if tick % AIR_TICKS == 0:
                self._step_machine(
                    AirQualitySample(t_ms=t_ms, pm25=self._air.pm25, pm10=self._air.pm10)
                )
                self._send(
                    AirQuality(
                        t_ms=t_ms,
                        pm25_tenths=int(round(self._air.pm25 * 10.0)),
                        pm10_tenths=int(round(self._air.pm10 * 10.0)),
                    )
                )
                self._auto_start(t_ms)

            ppg = self._ppg.sample(t_ms)
            self._ppg_buf.append((t_ms, int(ppg.red), int(ppg.ir)))
            if len(self._ppg_buf) > int(RR_WINDOW_S * PPG_FS_HZ):
                del self._ppg_buf[: len(self._ppg_buf) - int(RR_WINDOW_S * PPG_FS_HZ)]
            if not self._ppg_batch:
                self._ppg_batch_t0 = t_ms
            self._ppg_batch.append((int(ppg.red), int(ppg.ir)))
            if len(self._ppg_batch) == BATCH_TICKS:
                self._send(
                    PpgBatch(
                        t0_ms=self._ppg_batch_t0,
                        dt_us=int(1_000_000 / PPG_FS_HZ),
                        samples=tuple(self._ppg_batch),
                    )
                )
                self._ppg_batch = []

            if tick % 2 == 0:
                accel = self._accel.sample(t_ms)
                rep = self._reps.step(accel)
                if rep is not None:
                    self._step_machine(rep)
                if not self._accel_batch:
                    self._accel_batch_t0 = t_ms
                self._accel_batch.append((int(round(accel.x)), int(round(accel.y)),
                                          int(round(accel.z))))
                if len(self._accel_batch) == BATCH_TICKS // 2:
                    self._send(
                        AccelBatch(
                            t0_ms=self._accel_batch_t0,
                            dt_us=int(1_000_000 / ACCEL_FS_HZ),
                            samples=tuple(self._accel_batch),
                        )
                    )
                    self._accel_batch = []

            self._step_machine(Tick(t_ms=t_ms))

            if tick > 0 and tick % METRICS_TICKS == 0:
                metrics, readings = self._compute_metrics(t_ms)
                self._latest_metrics = metrics
                self._send(metrics)
                for reading in readings:
                    self._step_machine(reading)

            self._accel.set_active(
                self.machine.phase is Phase.ACTIVE_SET, label=self.machine.set_index
            )

            if self._should_stop(t_ms):
                break
            tick += 1

        return self._finalize(duration_ms=tick * TICK_MS)

    def _should_stop(self, t_ms: int) -> bool:
        if self.machine.is_terminal:
            if self._terminal_at_ms is None:
                self._terminal_at_ms = t_ms
            grace_ms = (max(TERMINAL_GRACE_S, self._effort.rep_period_s) + 1.0) * 1000.0
            return t_ms - self._terminal_at_ms >= grace_ms
        self._terminal_at_ms = None
        if (
            self.machine.start_refused
            and self.machine.phase is Phase.IDLE
            and not self._pending_timeline
            and self._refused_at_ms is not None
            and t_ms - self._refused_at_ms >= REFUSED_LINGER_S * 1000.0
        ):
            return True
        return False

    def _finalize(self, duration_ms: int = 0) -> DeviceRunReport:
        report = self.report
        report.counted_reps = self.machine.total_reps
        report.truth_reps_total = len(self._accel.truth_reps)
        by_set: dict[int, int] = {}
        for _, label in self._accel.truth_reps:
            by_set[label] = by_set.get(label, 0) + 1
        report.sets = [
            {
                "set": label,
                "truth_reps": by_set.get(label, 0),
                "counted_reps": self._counted_by_set.get(label, 0),
            }
            for label in sorted(set(by_set) | set(self._counted_by_set))
        ]
        report.duration_s = duration_ms / 1000.0
        if report.transport_error is None:
            if self.machine.phase is Phase.COMPLETED:
                report.outcome = "completed"
            elif self.machine.phase is Phase.ABORTED:
                report.outcome = "aborted"
            elif self.machine.phase is Phase.PAUSED:
                report.outcome = "paused"
            elif self.machine.start_refused:
                report.outcome = "refused"
            else:
                report.outcome = "timeout"
        try:
            self.transport.close()
        except Exception:
            pass
        return report


def run_device(
    scenario: ScenarioScript,
    transport,
    clock: str = "accelerated",
    token: bytes | None = None,
) -> DeviceRunReport:
    """Run a whole scripted device session over the given transport."""
    return DeviceSimulator(scenario, transport, clock=clock, token=token).run()
