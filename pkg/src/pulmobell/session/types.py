"""Domain types for the adaptive exercise session."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

from ..codes import CommandCode
from ..errors import ParameterError, ValidationError


class AirBand(IntEnum):
    GOOD = 0
    MODERATE = 1
    POOR = 2


@dataclass(frozen=True)
class AirQualitySample:
    t_ms: int
    pm25: float  # ug/m3
    pm10: float

    def __post_init__(self):
        if self.pm25 < 0 or self.pm10 < 0:
            raise ParameterError("particulate concentrations must be non-negative")


@dataclass(frozen=True)
class Regimen:
    sets: int = 3
    rest_s: float = 90.0
    start_level: int = 2
    max_level: int = 5

    def __post_init__(self):
        if self.sets < 1:
            raise ValidationError("regimen needs at least one set")
        if not 1 <= self.start_level <= self.max_level <= 5:
            raise ValidationError("need 1 <= start_level <= max_level <= 5")
        if self.rest_s < 0:
            raise ValidationError("rest_s must be non-negative")


# level -> (reps per set, tempo seconds per rep)
INTENSITY_TABLE: dict[int, tuple[int, float]] = {
    1: (8, 4.0),
    2: (10, 4.0),
    3: (10, 3.0),
    4: (12, 3.0),
    5: (15, 3.0),
}


def reps_per_set(level: int) -> int:
    return INTENSITY_TABLE[level][0]


def tempo_s_per_rep(level: int) -> float:
    return INTENSITY_TABLE[level][1]


class Phase(Enum):
    IDLE = "idle"
    AIR_CHECK = "air_check"
    ACTIVE_SET = "active_set"
    REST = "rest"
    PAUSED = "paused"
    COMPLETED = "completed"
    ABORTED = "aborted"


TERMINAL_PHASES = (Phase.COMPLETED, Phase.ABORTED)
# phases in which safety rules apply
ACTIVE_PHASES = (Phase.ACTIVE_SET, Phase.REST, Phase.PAUSED)


@dataclass(frozen=True)
class SafetyConfig:
    """Vitals-driven safety and adaptation thresholds."""

    spo2_abort: float = 85.0
    spo2_pause: float = 90.0
    spo2_pause_sustain_s: float = 10.0
    rr_high: float = 30.0
    rr_high_sustain_s: float = 15.0
    step_up_min_spo2: float = 94.0
    step_up_max_rr: float = 25.0


@dataclass(frozen=True)
class Tick:
    """Wall-of-device-time input; drives rest-to-set transitions."""

    t_ms: int


@dataclass(frozen=True)
class UserCommand:
    """An inbound control command (wire Command frame or local UI)."""

    command: CommandCode
    arg: int = 0
    t_ms: int = 0


class ControlKind(Enum):
    START = "start"
    PAUSE = "pause"
    RESUME = "resume"
    STOP = "stop"
    SET_INTENSITY = "set_intensity"
    NOTIFY = "notify"


@dataclass(frozen=True)
class ControllerCommand:
    """An outbound actuation/notification decision from the machine."""

    kind: ControlKind
    arg: int = 0


@dataclass
class SessionSummary:
    total_reps: int = 0
    sets_completed: int = 0
    min_spo2: float | None = None
    max_rr: float | None = None
    mean_hr: float | None = None
    warnings: int = 0
    level_trajectory: list[int] = field(default_factory=list)
    duration_s: float = 0.0
    outcome: str = "open"  # "completed" | "aborted" | "open"
