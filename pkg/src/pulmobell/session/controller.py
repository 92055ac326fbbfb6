"""The adaptive session state machine and its safety/adaptation rules.

The machine is a deterministic, single-threaded transition function over
typed inputs (rep events, vitals readings, air samples, user commands,
clock ticks). Safety rules are evaluated on every vitals input; intensity
adaptation happens once per set, at the set boundary, so the automatic
level never moves by more than one step per set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

from ..codes import AbortReason, CommandCode, EventCode, PauseReason, WarningCode
from ..dsp.types import Quality, RepEvent, VitalKind, VitalsReading
from ..errors import ParameterError
from .types import (
    ACTIVE_PHASES,
    TERMINAL_PHASES,
    AirBand,
    AirQualitySample,
    ControlKind,
    ControllerCommand,
    Phase,
    Regimen,
    SafetyConfig,
    Tick,
    UserCommand,
    reps_per_set,
)

# WHO 2021 24-hour guideline values bound the Good band; 35/100 bound Moderate.
AIR_GOOD_PM25 = 15.0
AIR_GOOD_PM10 = 45.0
AIR_MODERATE_PM25 = 35.0
AIR_MODERATE_PM10 = 100.0


def classify_air(pm25: float, pm10: float) -> AirBand:
    """Band particulate readings; bounds are inclusive."""
    if pm25 < 0 or pm10 < 0:
        raise ParameterError("particulate concentrations must be non-negative")
    if pm25 <= AIR_GOOD_PM25 and pm10 <= AIR_GOOD_PM10:
        return AirBand.GOOD
    if pm25 <= AIR_MODERATE_PM25 and pm10 <= AIR_MODERATE_PM10:
        return AirBand.MODERATE
    return AirBand.POOR


class AdjustReason(Enum):
    ABORT = "abort"
    PAUSE_LOW_SPO2 = "pause_low_spo2"
    RR_HIGH = "rr_high"
    STEP_UP = "step_up"
    HOLD = "hold"


@dataclass
class SetVitalsSummary:
    """Per-set vitals digest driving the boundary intensity decision."""

    min_spo2: float | None = None
    max_rr: float | None = None
    spo2_low_sustained_s: float = 0.0
    rr_high_sustained_s: float = 0.0


def adjust_intensity(
    level: int,
    set_summary: SetVitalsSummary,
    *,
    max_level: int = 5,
    safety: SafetyConfig | None = None,
) -> tuple[int, AdjustReason]:
    """Decide the next set's level from this set's vitals, in priority order.

    Abort and pause conditions outrank level moves and leave the level
    unchanged (the session machine acts on them immediately as readings
    arrive). A step-up needs positive evidence of good oxygenation;
    absent respiratory-rate data does not block it.
    """
    if not 1 <= level <= 5:
        raise ParameterError(f"level {level} outside 1..5")
    cfg = safety or SafetyConfig()
    if set_summary.min_spo2 is not None and set_summary.min_spo2 < cfg.spo2_abort:
        return level, AdjustReason.ABORT
    if set_summary.spo2_low_sustained_s >= cfg.spo2_pause_sustain_s:
        return level, AdjustReason.PAUSE_LOW_SPO2
    if set_summary.rr_high_sustained_s >= cfg.rr_high_sustain_s:
        return max(1, level - 1), AdjustReason.RR_HIGH
    if (
        set_summary.min_spo2 is not None
        and set_summary.min_spo2 >= cfg.step_up_min_spo2
        and (set_summary.max_rr is None or set_summary.max_rr <= cfg.step_up_max_rr)
    ):
        return min(max_level, level + 1), AdjustReason.STEP_UP
    return level, AdjustReason.HOLD


@dataclass(frozen=True)
class SessionEventOut:
    t_ms: int
    code: EventCode
    arg: int = 0


class StepResult(NamedTuple):
    events: list[SessionEventOut]
    commands: list[ControllerCommand]
    diagnostics: list[str]


SessionInput = Union[RepEvent, VitalsReading, AirQualitySample, UserCommand, Tick]


@dataclass
class _SustainTracker:
    """Tracks the longest contiguous run of a boolean vitals condition."""

    since_ms: int | None = None
    longest_s: float = 0.0

    def update(self, active: bool, t_ms: int) -> float:
        """Feed one observation; returns the current run length in seconds."""
        if not active:
            self.since_ms = None
            return 0.0
        if self.since_ms is None:
            self.since_ms = t_ms
        run = (t_ms - self.since_ms) / 1000.0
        self.longest_s = max(self.longest_s, run)
        return run

    def reset(self) -> None:
        self.since_ms = None
        self.longest_s = 0.0


@dataclass
class _HrAccumulator:
    total: float = 0.0
    count: int = 0


class SessionMachine:
    """One exercise session: air gate, set/rest pacing, vitals safety."""

    def __init__(self, regimen: Regimen | None = None, safety: SafetyConfig | None = None):
        self.regimen = regimen or Regimen()
        self.safety = safety or SafetyConfig()
        self.phase = Phase.IDLE
        self.current_level = self.regimen.start_level
        self.set_index = 0
        self.reps_in_set = 0
        self.total_reps = 0
        self.sets_completed = 0
        self.air_band: AirBand | None = None
        self.pause_reason: PauseReason | None = None
        self.vitals_history: deque[VitalsReading] = deque(maxlen=512)
        self.session_start_ms: int | None = None
        self.last_t_ms = 0
        self._prev_phase: Phase | None = None
        self._rest_until_ms: int | None = None
        self._rest_remaining_ms: int | None = None
        self._set_stats = SetVitalsSummary()
        self._spo2_low = _SustainTracker()
        self._rr_high = _SustainTracker()
        self._hr = _HrAccumulator()
        self._start_refused = False
        self._ignored_inputs = 0

    # -- public helpers -------------------------------------------------

    @property
    def is_terminal(self) -> bool:
        return self.phase in TERMINAL_PHASES

    @property
    def reps_target(self) -> int:
        return reps_per_set(self.current_level)

    @property
    def start_refused(self) -> bool:
        return self._start_refused

    def step(self, inp: SessionInput) -> StepResult:
        """Advance the machine by one input; pure in (state, input)."""
        events: list[SessionEventOut] = []
        commands: list[ControllerCommand] = []
        diagnostics: list[str] = []
        t = getattr(inp, "t_ms", self.last_t_ms)
        self.last_t_ms = max(self.last_t_ms, t)

        if self.is_terminal:
            self._ignored_inputs += 1
            return StepResult([], [], [f"ignored_input:{self.phase.value}"])

        if isinstance(inp, AirQualitySample):
            self._on_air(inp, events, commands)
        elif isinstance(inp, UserCommand):
            self._on_command(inp, events, commands, diagnostics)
        elif isinstance(inp, RepEvent):
            self._on_rep(inp, events, commands, diagnostics)
        elif isinstance(inp, VitalsReading):
            self._on_vitals(inp, events, commands)
        elif isinstance(inp, Tick):
            self._on_tick(inp, events)
        else:
            diagnostics.append(f"ignored_input:unknown:{type(inp).__name__}")
        return StepResult(events, commands, diagnostics)

    # -- input handlers ---------------------------------------------------

    def _on_air(self, s: AirQualitySample, events, commands) -> None:
        band = classify_air(s.pm25, s.pm10)
        previous = self.airband_or_none()
        self.air_band = band
        if self.phase is Phase.AIR_CHECK:
            self._resolve_gate(s.t_ms, events, commands)
            return
        if (
            self.phase in ACTIVE_PHASES
            and band is AirBand.POOR
            and previous is not AirBand.POOR
        ):
            # mid-session pollution warns but never aborts
            events.append(SessionEventOut(s.t_ms, EventCode.WARNING, WarningCode.AIR_POOR))
            commands.append(ControllerCommand(ControlKind.NOTIFY, WarningCode.AIR_POOR))

    def airband_or_none(self) -> AirBand | None:
        return self.air_band

    def _on_command(self, cmd: UserCommand, events, commands, diagnostics) -> None:
        code = cmd.command
        t = cmd.t_ms
        if code == CommandCode.START:
            if self.phase is not Phase.IDLE:
                diagnostics.append("ignored_input:start_outside_idle")
                return
            if self.air_band is None:
                self.phase = Phase.AIR_CHECK
                return
            self.phase = Phase.AIR_CHECK
            self._resolve_gate(t, events, commands)
        elif code == CommandCode.PAUSE:
            if self.phase in (Phase.ACTIVE_SET, Phase.REST):
                self._pause(t, PauseReason.USER, events, commands, notify=None)
            else:
                diagnostics.append("ignored_input:pause")
        elif code == CommandCode.RESUME:
            if self.phase is Phase.PAUSED:
                self._resume(t, events)
            else:
                diagnostics.append("ignored_input:resume")
        elif code == CommandCode.STOP:
            if self.phase in ACTIVE_PHASES or self.phase is Phase.AIR_CHECK:
                self._abort(t, AbortReason.USER_STOP, events, commands, warn=None)
            else:
                diagnostics.append("ignored_input:stop")
        elif code == CommandCode.SET_INTENSITY:
            if not 1 <= cmd.arg <= self.regimen.max_level:
                diagnostics.append(f"ignored_input:bad_level:{cmd.arg}")
                return
            if self.phase not in ACTIVE_PHASES:
                diagnostics.append("ignored_input:set_intensity_phase")
                return
            if cmd.arg != self.current_level:
                self.current_level = cmd.arg
                events.append(
                    SessionEventOut(t, EventCode.INTENSITY_CHANGED, self.current_level)
                )
                if self.phase is Phase.ACTIVE_SET:
                    self._maybe_finish_set(t, events, commands)
        elif code == CommandCode.REQUEST_STATUS:
            pass  # answered at the device layer with a fresh metrics frame
        else:
            diagnostics.append(f"ignored_input:command:{code}")

    def _on_rep(self, rep: RepEvent, events, commands, diagnostics) -> None:
        if self.phase is not Phase.ACTIVE_SET:
            diagnostics.append("ignored_input:rep_outside_set")
            return
        self.reps_in_set += 1
        self.total_reps += 1
        events.append(SessionEventOut(rep.t_ms, EventCode.REP, self.reps_in_set))
        self._maybe_finish_set(rep.t_ms, events, commands)

    def _on_vitals(self, reading: VitalsReading, events, commands) -> None:
        self.vitals_history.append(reading)
        if self.phase not in ACTIVE_PHASES or reading.quality is not Quality.VALID:
            return
        cfg = self.safety
        t = reading.t_ms
        if reading.kind is VitalKind.SPO2:
            if self._stats_open():
                if self._set_stats.min_spo2 is None or reading.value < self._set_stats.min_spo2:
                    self._set_stats.min_spo2 = reading.value
            if reading.value < cfg.spo2_abort:
                self._abort(t, AbortReason.DESATURATION, events, commands,
                            warn=WarningCode.DESATURATION)
                return
            run = self._spo2_low.update(reading.value < cfg.spo2_pause, t)
            self._set_stats.spo2_low_sustained_s = max(
                self._set_stats.spo2_low_sustained_s, self._spo2_low.longest_s
            )
            if run >= cfg.spo2_pause_sustain_s and self.phase is not Phase.PAUSED:
                self._pause(t, PauseReason.LOW_SPO2, events, commands,
                            notify=WarningCode.DESATURATION)
        elif reading.kind is VitalKind.RESP_RATE:
            if self._stats_open():
                if self._set_stats.max_rr is None or reading.value > self._set_stats.max_rr:
                    self._set_stats.max_rr = reading.value
            self._rr_high.update(reading.value > cfg.rr_high, t)
            self._set_stats.rr_high_sustained_s = max(
                self._set_stats.rr_high_sustained_s, self._rr_high.longest_s
            )
        elif reading.kind is VitalKind.HEART_RATE:
            self._hr.total += reading.value
            self._hr.count += 1

    def _on_tick(self, tick: Tick, events) -> None:
        if (
            self.phase is Phase.REST
            and self._rest_until_ms is not None
            and tick.t_ms >= self._rest_until_ms
        ):
            self._begin_set(self.set_index + 1, tick.t_ms, events)

    # -- transitions -----------------------------------------------------

    def _resolve_gate(self, t_ms: int, events, commands) -> None:
        if self.air_band is None:
            return  # stay in AIR_CHECK until a sample arrives
        if self.air_band is AirBand.POOR:
            self.phase = Phase.IDLE
            self._start_refused = True
            events.append(SessionEventOut(t_ms, EventCode.WARNING, WarningCode.AIR_POOR))
            commands.append(ControllerCommand(ControlKind.NOTIFY, WarningCode.AIR_POOR))
            return
        self._start_refused = False
        self.session_start_ms = t_ms
        events.append(SessionEventOut(t_ms, EventCode.SESSION_START, 0))
        if self.air_band is AirBand.MODERATE:
            events.append(SessionEventOut(t_ms, EventCode.WARNING, WarningCode.AIR_MODERATE))
            commands.append(ControllerCommand(ControlKind.NOTIFY, WarningCode.AIR_MODERATE))
        events.append(
            SessionEventOut(t_ms, EventCode.INTENSITY_CHANGED, self.current_level)
        )
        self._begin_set(1, t_ms, events)

    def _begin_set(self, index: int, t_ms: int, events) -> None:
        self.phase = Phase.ACTIVE_SET
        self.set_index = index
        self.reps_in_set = 0
        self._rest_until_ms = None
        self._set_stats = SetVitalsSummary()
        self._spo2_low.reset()
        self._rr_high.reset()
        events.append(SessionEventOut(t_ms, EventCode.SET_START, index))

    def _stats_open(self) -> bool:
        return self.phase in (Phase.ACTIVE_SET, Phase.PAUSED)

    def _maybe_finish_set(self, t_ms: int, events, commands) -> None:
        if self.reps_in_set < self.reps_target:
            return
        events.append(SessionEventOut(t_ms, EventCode.SET_END, self.set_index))
        self.sets_completed += 1
        if self.set_index >= self.regimen.sets:
            self.phase = Phase.COMPLETED
            events.append(SessionEventOut(t_ms, EventCode.COMPLETED, 0))
            return
        new_level, reason = adjust_intensity(
            self.current_level,
            self._set_stats,
            max_level=self.regimen.max_level,
            safety=self.safety,
        )
        if reason in (AdjustReason.RR_HIGH, AdjustReason.STEP_UP) and new_level != self.current_level:
            self.current_level = new_level
            events.append(SessionEventOut(t_ms, EventCode.INTENSITY_CHANGED, new_level))
            commands.append(ControllerCommand(ControlKind.SET_INTENSITY, new_level))
            if reason is AdjustReason.RR_HIGH:
                events.append(SessionEventOut(t_ms, EventCode.WARNING, WarningCode.RR_HIGH))
                commands.append(ControllerCommand(ControlKind.NOTIFY, WarningCode.RR_HIGH))
        self.phase = Phase.REST
        self._rest_until_ms = t_ms + int(self.regimen.rest_s * 1000)
        events.append(SessionEventOut(t_ms, EventCode.REST_START, self.set_index))

    def _pause(self, t_ms, reason: PauseReason, events, commands, notify) -> None:
        self._prev_phase = self.phase
        if self.phase is Phase.REST and self._rest_until_ms is not None:
            self._rest_remaining_ms = max(0, self._rest_until_ms - t_ms)
        self.phase = Phase.PAUSED
        self.pause_reason = reason
        if notify is not None:
            events.append(SessionEventOut(t_ms, EventCode.WARNING, notify))
        events.append(SessionEventOut(t_ms, EventCode.PAUSED, reason))
        commands.append(ControllerCommand(ControlKind.PAUSE, reason))
        if notify is not None:
            commands.append(ControllerCommand(ControlKind.NOTIFY, notify))

    def _resume(self, t_ms, events) -> None:
        self.phase = self._prev_phase or Phase.ACTIVE_SET
        self._prev_phase = None
        self.pause_reason = None
        if self.phase is Phase.REST and self._rest_remaining_ms is not None:
            self._rest_until_ms = t_ms + self._rest_remaining_ms
            self._rest_remaining_ms = None
        self._spo2_low.since_ms = None
        self._rr_high.since_ms = None
        events.append(SessionEventOut(t_ms, EventCode.RESUMED, 0))

    def _abort(self, t_ms, reason: AbortReason, events, commands, warn) -> None:
        self.phase = Phase.ABORTED
        if warn is not None:
            events.append(SessionEventOut(t_ms, EventCode.WARNING, warn))
        events.append(SessionEventOut(t_ms, EventCode.ABORTED, reason))
        commands.append(ControllerCommand(ControlKind.STOP, 0))
        if warn is not None:
            commands.append(ControllerCommand(ControlKind.NOTIFY, warn))

    def mean_hr(self) -> float | None:
        return self._hr.total / self._hr.count if self._hr.count else None


def session_step(
    machine: SessionMachine, inp: SessionInput
) -> tuple[SessionMachine, list[SessionEventOut], list[ControllerCommand]]:
    """Functional facade matching the (state, input) -> (state', events, commands) shape."""
    result = machine.step(inp)
    return machine, result.events, result.commands
