from .types import (
    AccelSample,
    PpgSample,
    PpgWindow,
    Quality,
    RepCounterConfig,
    RepEvent,
    Spo2Calibration,
    VitalKind,
    VitalsReading,
)
from .filters import bandlimit
from .rep_counter import RepCounter, rep_counter_step
from .vitals import hr_from_window, rr_from_window, spo2_from_window

__all__ = [
    "AccelSample",
    "PpgSample",
    "PpgWindow",
    "VitalsReading",
    "VitalKind",
    "Quality",
    "RepEvent",
    "RepCounterConfig",
    "Spo2Calibration",
    "bandlimit",
    "RepCounter",
    "rep_counter_step",
    "spo2_from_window",
    "rr_from_window",
    "hr_from_window",
]
