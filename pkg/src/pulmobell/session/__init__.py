from .types import (
    AirBand,
    AirQualitySample,
    ControlKind,
    ControllerCommand,
    INTENSITY_TABLE,
    Phase,
    Regimen,
    SafetyConfig,
    SessionSummary,
    Tick,
    UserCommand,
    reps_per_set,
    tempo_s_per_rep,
)
from .controller import (
    AdjustReason,
    SessionEventOut,
    SessionMachine,
    SetVitalsSummary,
    StepResult,
    adjust_intensity,
    classify_air,
    session_step,
)
from .summary import summarize

__all__ = [
    "AirBand",
    "AirQualitySample",
    "Regimen",
    "INTENSITY_TABLE",
    "reps_per_set",
    "tempo_s_per_rep",
    "Phase",
    "SafetyConfig",
    "SessionSummary",
    "Tick",
    "UserCommand",
    "ControllerCommand",
    "ControlKind",
    "classify_air",
    "adjust_intensity",
    "AdjustReason",
    "SetVitalsSummary",
    "SessionMachine",
    "SessionEventOut",
    "StepResult",
    "session_step",
    "summarize",
]
