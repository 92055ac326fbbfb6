"""Sensor sample types, estimator outputs, and their configurations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ..errors import ParameterError

ACCEL_RANGE_MG = 16000.0  # +/- 16 g sensor range
ADC_MAX = 65535.0


@dataclass(frozen=True)
class AccelSample:
    t_ms: int
    x: float  # milli-g, 1000 = 1 g
    y: float
    z: float

    def __post_init__(self):
        for axis in (self.x, self.y, self.z):
            if abs(axis) > ACCEL_RANGE_MG:
                raise ParameterError(f"accel sample {axis} mg outside +/-{ACCEL_RANGE_MG:g}")


@dataclass(frozen=True)
class PpgSample:
    t_ms: int
    red: float  # ADC counts 0..65535
    ir: float

    def __post_init__(self):
        for ch in (self.red, self.ir):
            if not 0.0 <= ch <= ADC_MAX:
                raise ParameterError(f"ppg count {ch} outside ADC range")


class PpgWindow:
    """A uniformly sampled dual-channel PPG segment.

    Accepts a sequence of :class:`PpgSample` or pre-split arrays. Spacing
    must be uniform to within +/-1 ms and timestamps strictly increasing.
    """

    def __init__(
        self,
        samples: Iterable[PpgSample] | None = None,
        *,
        t_ms: Sequence[int] | None = None,
        red: Sequence[float] | None = None,
        ir: Sequence[float] | None = None,
        fs_hz: float = 100.0,
    ) -> None:
        if samples is not None:
            samples = list(samples)
            t_ms = [s.t_ms for s in samples]
            red = [s.red for s in samples]
            ir = [s.ir for s in samples]
        if t_ms is None or red is None or ir is None:
            raise ParameterError("PpgWindow needs samples or t_ms/red/ir arrays")
        self.t_ms = np.asarray(t_ms, dtype=np.int64)
        self.red = np.asarray(red, dtype=np.float64)
        self.ir = np.asarray(ir, dtype=np.float64)
        self.fs_hz = float(fs_hz)
        if not (len(self.t_ms) == len(self.red) == len(self.ir)):
            raise ParameterError("PpgWindow arrays must have equal length")
        if fs_hz <= 0:
            raise ParameterError("fs_hz must be positive")
        if len(self.t_ms) >= 2:
            dt = np.diff(self.t_ms)
            if np.any(dt <= 0):
                raise ParameterError("PpgWindow timestamps must strictly increase")
            nominal = 1000.0 / self.fs_hz
            if np.any(np.abs(dt - nominal) > 1.0):
                raise ParameterError("PpgWindow spacing not uniform within +/-1 ms")

    def __len__(self) -> int:
        return len(self.t_ms)

    @property
    def duration_s(self) -> float:
        return len(self.t_ms) / self.fs_hz

    @property
    def end_t_ms(self) -> int:
        return int(self.t_ms[-1]) if len(self.t_ms) else 0


class VitalKind(Enum):
    SPO2 = "spo2"
    RESP_RATE = "rr"
    HEART_RATE = "hr"


class Quality(Enum):
    VALID = "valid"
    LOW_PERFUSION = "low_perfusion"
    NO_DOMINANT_PEAK = "no_dominant_peak"
    NO_BEATS = "no_beats"
    OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True)
class VitalsReading:
    t_ms: int
    kind: VitalKind
    value: float  # percent (SpO2) or per-minute; NaN when not computable
    quality: Quality

    @property
    def is_valid(self) -> bool:
        return self.quality is Quality.VALID


@dataclass(frozen=True)
class RepEvent:
    t_ms: int  # completion timestamp
    duration_s: float
    peak_mg: float


@dataclass(frozen=True)
class RepCounterConfig:
    fs_hz: float = 50.0
    gravity_ema_alpha: float = 0.02
    smooth_window_s: float = 0.3
    theta_up_mg: float = 150.0
    theta_down_mg: float = -100.0
    rep_min_s: float = 1.0
    rep_max_s: float = 10.0
    refractory_s: float = 0.5

    def __post_init__(self):
        if not (self.theta_up_mg > 0.0 > self.theta_down_mg):
            raise ParameterError("need theta_up_mg > 0 > theta_down_mg")
        if not self.rep_min_s < self.rep_max_s:
            raise ParameterError("need rep_min_s < rep_max_s")
        if self.fs_hz <= 0 or not 0.0 < self.gravity_ema_alpha <= 1.0:
            raise ParameterError("bad sampling/EMA parameters")


@dataclass(frozen=True)
class Spo2Calibration:
    a: float = 110.0
    b: float = 25.0  # SpO2 = a - b * R
    clamp_lo: float = 70.0
    clamp_hi: float = 100.0

    def __post_init__(self):
        if self.b <= 0:
            raise ParameterError("calibration slope b must be positive")
        if not self.clamp_lo < self.clamp_hi:
            raise ParameterError("need clamp_lo < clamp_hi")

    def value_for_ratio(self, r: float) -> float:
        """Unclamped calibration curve; strictly decreasing in r."""
        return self.a - self.b * r

    def clamp(self, value: float) -> float:
        return min(max(value, self.clamp_lo), self.clamp_hi)
