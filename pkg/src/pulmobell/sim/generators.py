"""Synthetic sensor sources for the simulated dumbbell.

Both sources are incremental (one sample per call) so live steering takes
effect on the next sample while beat/lift phase stays continuous. The
batch helpers gen_accel_trace / gen_ppg_trace drive the same sources for
offline use and return ground truth alongside the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dsp.types import AccelSample, PpgSample, Spo2Calibration
from ..errors import ParameterError
from .profiles import EffortProfile, PhysioProfile

ACCEL_FS_HZ = 50.0
PPG_FS_HZ = 100.0
GRAVITY_MG = 1000.0
ACCEL_CLIP_MG = 16000.0

# pulse shape: half-sine systolic rise over the first 15% of the beat,
# then exponential decay with a 25%-of-beat time constant
PULSE_RISE_FRACTION = 0.15
PULSE_DECAY_FRACTION = 0.25


def pulse_shape(beat_fraction: float) -> float:
    """Unit-amplitude stylized pulse waveform at a fractional beat phase."""
    if beat_fraction < PULSE_RISE_FRACTION:
        return math.sin(0.5 * math.pi * beat_fraction / PULSE_RISE_FRACTION)
    return math.exp(-(beat_fraction - PULSE_RISE_FRACTION) / PULSE_DECAY_FRACTION)


class PpgSource:
    """Dual-channel PPG generator with respiratory amplitude modulation.

    ir(t) = dc_ir * (1 + perfusion_ir * (1 + m sin(2 pi f_r t)) * p(t)) + noise
    and red(t) has the same shape with perfusion scaled by the calibration
    ratio R = (a - spo2_target) / b, so estimators can be scored against
    the configured target.
    """

    def __init__(self, physio: PhysioProfile, rng: np.random.Generator,
                 cal: Spo2Calibration | None = None) -> None:
        physio.validate()
        self.physio = physio
        self.cal = cal or Spo2Calibration()
        self._rng = rng
        self._beat_phase = 0.0
        self._resp_phase = 0.0

    def set_physio(self, physio: PhysioProfile) -> None:
        physio.validate()
        self.physio = physio

    @property
    def ratio(self) -> float:
        return (self.cal.a - self.physio.spo2_target) / self.cal.b

    def sample(self, t_ms: int) -> PpgSample:
        p = self.physio
        dt = 1.0 / PPG_FS_HZ
        pulse = pulse_shape(self._beat_phase)
        modulation = 1.0 + p.resp_mod_depth * math.sin(2.0 * math.pi * self._resp_phase)
        drive = p.perfusion_ir * modulation * pulse
        ir = p.dc_ir * (1.0 + drive)
        red = p.dc_red * (1.0 + self.ratio * drive)
        if p.ppg_noise_sd > 0:
            red += self._rng.normal(0.0, p.ppg_noise_sd)
            ir += self._rng.normal(0.0, p.ppg_noise_sd)
        self._beat_phase += dt * p.hr_bpm / 60.0
        self._beat_phase -= math.floor(self._beat_phase)
        self._resp_phase += dt * p.resp_freq_hz
        self._resp_phase -= math.floor(self._resp_phase)

        def quantize(v: float) -> int:
            q = int(round(v))
            if q < 0 or q > 65535:
                raise ParameterError(f"PPG sample {q} outside ADC range")
            return q

        return PpgSample(t_ms=t_ms, red=quantize(red), ir=quantize(ir))


class AccelSource:
    """Lift-axis accelerometer generator with per-set gating.

    While lifting, the vertical axis carries gravity plus a sinusoid of
    one period per repetition. Deactivation is graceful: an in-flight
    repetition completes its period (the user finishes the movement)
    before the source goes quiescent. Completed periods are the ground
    truth the run report exposes.
    """

    def __init__(self, effort: EffortProfile, rng: np.random.Generator) -> None:
        effort.validate()
        self.effort = effort
        self._rng = rng
        self._active_requested = False
        self._lifting = False
        self._phase = 0.0
        self._label = 0
        self.truth_reps: list[tuple[int, int]] = []  # (t_ms, set label)

    def set_effort(self, effort: EffortProfile) -> None:
        effort.validate()
        self.effort = effort

    def set_active(self, active: bool, label: int = 0) -> None:
        self._active_requested = active
        if active:
            self._label = label
            if not self._lifting:
                self._lifting = True
                self._phase = 0.0

    def sample(self, t_ms: int) -> AccelSample:
        e = self.effort
        dt = 1.0 / ACCEL_FS_HZ
        z = GRAVITY_MG
        if self._lifting:
            at_boundary = self._phase < 1e-9
            if e.rep_amplitude_mg <= 0.0 or (not self._active_requested and at_boundary):
                self._lifting = False
                self._phase = 0.0
            else:
                z += e.rep_amplitude_mg * math.sin(2.0 * math.pi * self._phase)
                self._phase += dt / e.rep_period_s
                if self._phase >= 1.0 - 1e-9:
                    self._phase -= 1.0
                    if abs(self._phase) < 1e-9:
                        self._phase = 0.0
                    self.truth_reps.append((t_ms, self._label))
                    if not self._active_requested:
                        self._lifting = False
                        self._phase = 0.0

        x = y = 0.0
        if e.accel_noise_sd_mg > 0:
            x = self._rng.normal(0.0, e.accel_noise_sd_mg)
            y = self._rng.normal(0.0, e.accel_noise_sd_mg)
            z += self._rng.normal(0.0, e.accel_noise_sd_mg)
        clip = lambda v: max(-ACCEL_CLIP_MG, min(ACCEL_CLIP_MG, v))
        return AccelSample(t_ms=t_ms, x=clip(x), y=clip(y), z=clip(z))


@dataclass
class PpgTrace:
    samples: list[PpgSample]
    fs_hz: float


@dataclass
class AccelTrace:
    samples: list[AccelSample]
    fs_hz: float
    truth_rep_t_ms: list[int]


def gen_ppg_trace(physio: PhysioProfile, duration_s: float, seed: int = 0) -> PpgTrace:
    if duration_s <= 0:
        raise ParameterError("duration must be positive")
    source = PpgSource(physio, np.random.default_rng(seed))
    n = int(round(duration_s * PPG_FS_HZ))
    samples = [source.sample(int(round(i * 1000.0 / PPG_FS_HZ))) for i in range(n)]
    return PpgTrace(samples=samples, fs_hz=PPG_FS_HZ)


def gen_accel_trace(effort: EffortProfile, duration_s: float, seed: int = 0) -> AccelTrace:
    """Lift for reps_intended periods, then rest for the remaining time."""
    if duration_s < effort.rep_period_s:
        raise ParameterError("duration must cover at least one rep period")
    source = AccelSource(effort, np.random.default_rng(seed))
    lift_duration = effort.reps_intended * effort.rep_period_s
    if effort.rep_amplitude_mg > 0 and effort.reps_intended > 0:
        source.set_active(True, label=1)
    n = int(round(duration_s * ACCEL_FS_HZ))
    samples = []
    deactivated = effort.rep_amplitude_mg == 0 or effort.reps_intended == 0
    for i in range(n):
        t_s = i / ACCEL_FS_HZ
        if not deactivated and t_s >= lift_duration - 1e-9:
            source.set_active(False)
            deactivated = True
        samples.append(source.sample(int(round(t_s * 1000.0))))
    return AccelTrace(
        samples=samples,
        fs_hz=ACCEL_FS_HZ,
        truth_rep_t_ms=[t for t, _ in source.truth_reps],
    )
