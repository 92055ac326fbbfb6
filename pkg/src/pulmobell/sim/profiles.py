"""Scenario scripting: physiologic/effort profiles and timed changes.

A scenario is one JSON document:

    {
      "seed": 7,
      "regimen": {"sets": 3, "rest_s": 90, "start_level": 2},
      "physio": {"spo2_target": 97, "hr_bpm": 72, ...},
      "effort": {"rep_period_s": 4, "rep_amplitude_mg": 400, ...},
      "air": {"pm25": 8, "pm10": 20},
      "timeline": [{"t_s": 100, "field": "spo2_target", "value": 84}]
    }

Timeline changes address any physio/effort/air field by name and apply at
their scheduled simulated time; steering commands have the same shape but
apply immediately.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..errors import ScenarioError, SteeringError, ValidationError
from ..session.types import Regimen

ADC_MAX = 65535.0


@dataclass(frozen=True)
class PhysioProfile:
    hr_bpm: float = 72.0
    spo2_target: float = 97.0
    resp_freq_hz: float = 0.25
    resp_mod_depth: float = 0.2
    perfusion_ir: float = 0.02
    ppg_noise_sd: float = 30.0  # ADC counts
    dc_red: float = 30000.0
    dc_ir: float = 30000.0

    def validate(self) -> None:
        if not 40.0 <= self.hr_bpm <= 180.0:
            raise ValidationError(f"hr_bpm {self.hr_bpm} outside 40..180")
        if not 70.0 <= self.spo2_target <= 100.0:
            raise ValidationError(f"spo2_target {self.spo2_target} outside 70..100")
        if not 0.05 <= self.resp_freq_hz <= 0.6:
            raise ValidationError(f"resp_freq_hz {self.resp_freq_hz} outside 0.05..0.6")
        if not 0.0 <= self.resp_mod_depth <= 0.5:
            raise ValidationError(f"resp_mod_depth {self.resp_mod_depth} outside 0..0.5")
        if not 0.0 < self.perfusion_ir <= 0.5:
            raise ValidationError(f"perfusion_ir {self.perfusion_ir} outside (0, 0.5]")
        if self.ppg_noise_sd < 0:
            raise ValidationError("ppg_noise_sd must be non-negative")
        # Worst-case swing (red channel may carry up to 2x IR perfusion at
        # the low end of the calibration) plus noise headroom must stay in
        # the ADC range.
        for dc in (self.dc_red, self.dc_ir):
            if not 0.0 < dc < ADC_MAX:
                raise ValidationError(f"dc level {dc} outside ADC range")
            swing = dc * 2.0 * self.perfusion_ir * (1.0 + self.resp_mod_depth)
            if dc + swing + 5.0 * self.ppg_noise_sd > ADC_MAX or dc - 5.0 * self.ppg_noise_sd < 0:
                raise ValidationError("profile drives PPG outside the ADC range")


@dataclass(frozen=True)
class EffortProfile:
    rep_period_s: float = 4.0
    rep_amplitude_mg: float = 400.0
    accel_noise_sd_mg: float = 20.0
    reps_intended: int = 10

    # Amplitudes at or below the detector's upper threshold would be
    # silently invisible; zero means "resting", anything else must clear it.
    DETECTABLE_FLOOR_MG = 150.0

    def validate(self) -> None:
        if not 1.0 <= self.rep_period_s <= 10.0:
            raise ValidationError(f"rep_period_s {self.rep_period_s} outside 1..10")
        if self.rep_amplitude_mg != 0.0 and not (
            self.DETECTABLE_FLOOR_MG < self.rep_amplitude_mg <= 8000.0
        ):
            raise ValidationError(
                f"rep_amplitude_mg {self.rep_amplitude_mg} must be 0 or in (150, 8000]"
            )
        if self.accel_noise_sd_mg < 0:
            raise ValidationError("accel_noise_sd_mg must be non-negative")
        if self.reps_intended < 0:
            raise ValidationError("reps_intended must be non-negative")


@dataclass(frozen=True)
class AirConditions:
    pm25: float = 8.0
    pm10: float = 20.0

    def validate(self) -> None:
        for v in (self.pm25, self.pm10):
            if not 0.0 <= v <= 6553.5:
                raise ValidationError(f"particulate value {v} outside 0..6553.5")


@dataclass(frozen=True)
class TimelineChange:
    t_s: float
    field: str
    value: float


@dataclass(frozen=True)
class SteeringCommand:
    """An immediate field change, from the CLI or the dashboard."""

    field: str
    value: float


_PHYSIO_FIELDS = set(PhysioProfile.__dataclass_fields__)
_EFFORT_FIELDS = set(EffortProfile.__dataclass_fields__)
_AIR_FIELDS = set(AirConditions.__dataclass_fields__)
STEERABLE_FIELDS = _PHYSIO_FIELDS | _EFFORT_FIELDS | _AIR_FIELDS


@dataclass
class ScenarioScript:
    seed: int = 0
    regimen: Regimen = field(default_factory=Regimen)
    physio: PhysioProfile = field(default_factory=PhysioProfile)
    effort: EffortProfile = field(default_factory=EffortProfile)
    air: AirConditions = field(default_factory=AirConditions)
    timeline: list[TimelineChange] = field(default_factory=list)
    max_s: float = 1200.0  # hard cap on simulated run length
    auto_start: bool = True
    device_label: str = "simulator"

    def validate(self) -> None:
        self.physio.validate()
        self.effort.validate()
        self.air.validate()
        if self.max_s <= 0:
            raise ValidationError("max_s must be positive")
        last = -1.0
        physio, effort, air = self.physio, self.effort, self.air
        for change in self.timeline:
            if change.field not in STEERABLE_FIELDS:
                raise ScenarioError(f"timeline field {change.field!r} is not steerable")
            if change.t_s < last:
                raise ScenarioError("timeline times must be non-decreasing")
            last = change.t_s
            try:
                physio, effort, air = apply_change(physio, effort, air, change.field, change.value)
            except SteeringError as exc:
                raise ScenarioError(f"timeline change at t={change.t_s}: {exc}") from exc


def apply_change(
    physio: PhysioProfile,
    effort: EffortProfile,
    air: AirConditions,
    field_name: str,
    value: float,
) -> tuple[PhysioProfile, EffortProfile, AirConditions]:
    """Return updated profiles with one field changed, after validation.

    Raises SteeringError and leaves inputs untouched when the new value
    breaks the owning profile's invariants.
    """
    try:
        if field_name in _PHYSIO_FIELDS:
            physio = replace(physio, **{field_name: float(value)})
            physio.validate()
        elif field_name in _EFFORT_FIELDS:
            if field_name == "reps_intended":
                effort = replace(effort, reps_intended=int(value))
            else:
                effort = replace(effort, **{field_name: float(value)})
            effort.validate()
        elif field_name in _AIR_FIELDS:
            air = replace(air, **{field_name: float(value)})
            air.validate()
        else:
            raise SteeringError(f"unknown field {field_name!r}")
    except ValidationError as exc:
        raise SteeringError(str(exc)) from exc
    return physio, effort, air


def scenario_from_dict(doc: dict) -> ScenarioScript:
    try:
        regimen = Regimen(**doc.get("regimen", {}))
        physio = PhysioProfile(**doc.get("physio", {}))
        effort = EffortProfile(**doc.get("effort", {}))
        air = AirConditions(**doc.get("air", {}))
        timeline = [
            TimelineChange(t_s=float(c["t_s"]), field=str(c["field"]), value=float(c["value"]))
            for c in doc.get("timeline", [])
        ]
        scenario = ScenarioScript(
            seed=int(doc.get("seed", 0)),
            regimen=regimen,
            physio=physio,
            effort=effort,
            air=air,
            timeline=timeline,
            max_s=float(doc.get("max_s", 1200.0)),
            auto_start=bool(doc.get("auto_start", True)),
            device_label=str(doc.get("device_label", "simulator")),
        )
    except (TypeError, KeyError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> ScenarioScript:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    return scenario_from_dict(doc)


def scenario_to_dict(s: ScenarioScript) -> dict:
    return {
        "seed": s.seed,
        "regimen": asdict(s.regimen),
        "physio": asdict(s.physio),
        "effort": asdict(s.effort),
        "air": asdict(s.air),
        "timeline": [asdict(c) for c in s.timeline],
        "max_s": s.max_s,
        "auto_start": s.auto_start,
        "device_label": s.device_label,
    }
