"""Shared byte-code tables for the telemetry link and the session machine.

These values go on the wire; both the device-side controller and the host
decode against this single definition.
"""

from enum import IntEnum


class EventCode(IntEnum):
    SESSION_START = 0
    SET_START = 1       # arg = set index (1-based)
    REP = 2             # arg = rep count within the current set
    SET_END = 3         # arg = set index
    REST_START = 4      # arg = set index just finished
    WARNING = 5         # arg = WarningCode
    PAUSED = 6          # arg = PauseReason
    RESUMED = 7
    ABORTED = 8         # arg = AbortReason
    COMPLETED = 9
    INTENSITY_CHANGED = 10  # arg = new level; audit trail for level changes


class CommandCode(IntEnum):
    START = 0
    PAUSE = 1
    RESUME = 2
    STOP = 3
    SET_INTENSITY = 4   # arg = level 1..5
    REQUEST_STATUS = 5


class WarningCode(IntEnum):
    AIR_POOR = 0
    AIR_MODERATE = 1
    DESATURATION = 2
    RR_HIGH = 3
    SENSOR_QUALITY = 4


class PauseReason(IntEnum):
    USER = 0
    LOW_SPO2 = 1


class AbortReason(IntEnum):
    USER_STOP = 0
    DESATURATION = 1


class SteerField(IntEnum):
    """Addressable simulator fields for live steering over the wire."""

    SPO2_TARGET = 0
    HR_BPM = 1
    RESP_FREQ_HZ = 2
    RESP_MOD_DEPTH = 3
    PERFUSION_IR = 4
    PPG_NOISE_SD = 5
    REP_PERIOD_S = 6
    REP_AMPLITUDE_MG = 7
    ACCEL_NOISE_SD_MG = 8
    PM25 = 9
    PM10 = 10


STEER_FIELD_BY_NAME = {f.name.lower(): f for f in SteerField}


# 2-bit per-metric quality fields inside DerivedMetrics.quality_flags:
# bits [1:0] SpO2, [3:2] respiratory rate, [5:4] heart rate.
QUALITY_VALID = 0
QUALITY_DEGRADED = 1      # low perfusion / no dominant peak / no beats
QUALITY_OUT_OF_RANGE = 2
QUALITY_MISSING = 3


def pack_quality_flags(spo2_q: int, rr_q: int, hr_q: int) -> int:
    return (spo2_q & 0x3) | ((rr_q & 0x3) << 2) | ((hr_q & 0x3) << 4)


def unpack_quality_flags(flags: int) -> tuple[int, int, int]:
    return flags & 0x3, (flags >> 2) & 0x3, (flags >> 4) & 0x3
