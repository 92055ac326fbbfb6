import math

import numpy as np
import pytest

from pulmobell.dsp import (
    PpgWindow,
    Quality,
    Spo2Calibration,
    VitalKind,
    hr_from_window,
    rr_from_window,
    spo2_from_window,
)
from pulmobell.errors import ParameterError, WindowError
from pulmobell.sim import PhysioProfile, gen_ppg_trace

FS = 100.0


def _window(red, ir, fs=FS):
    n = len(red)
    return PpgWindow(t_ms=[int(i * 1000 / fs) for i in range(n)], red=red, ir=ir, fs_hz=fs)


def _trace_window(physio, duration_s=40.0, seed=0, last_s=None):
    trace = gen_ppg_trace(physio, duration_s, seed)
    samples = trace.samples
    if last_s is not None:
        samples = samples[-int(last_s * FS):]
    return PpgWindow(samples=samples, fs_hz=FS)


# ---------------------------------------------------------------- SpO2


def test_equal_modulation_gives_exactly_85():
    t = np.arange(int(8 * FS)) / FS
    signal = 5000.0 + 300.0 * np.sin(2 * np.pi * 1.2 * t)
    reading = spo2_from_window(_window(signal, signal))
    assert reading.kind is VitalKind.SPO2
    assert reading.quality is Quality.VALID
    assert reading.value == pytest.approx(85.0, abs=1e-9)


def test_ratio_0_4_hits_upper_clamp_boundary():
    # 1.25 Hz gives an integer cycle count over 8 s, so channel means are exact
    t = np.arange(int(8 * FS)) / FS
    carrier = np.sin(2 * np.pi * 1.25 * t)
    ir = 5000.0 * (1.0 + 0.05 * carrier)
    red = 5000.0 * (1.0 + 0.4 * 0.05 * carrier)
    reading = spo2_from_window(_window(red, ir))
    assert reading.value == pytest.approx(100.0, abs=1e-9)
    assert reading.quality is Quality.VALID


def test_generator_round_trip_target_94():
    values = []
    for k in range(10):
        w = _trace_window(PhysioProfile(spo2_target=94.0), duration_s=8.0 + 4 * k, seed=k,
                          last_s=4.0)
        reading = spo2_from_window(w)
        assert reading.quality is Quality.VALID
        values.append(reading.value)
    assert abs(float(np.mean(values)) - 94.0) <= 1.0


def test_flat_channels_flag_low_perfusion():
    flat = np.full(int(5 * FS), 20000.0)
    reading = spo2_from_window(_window(flat.copy(), flat.copy()))
    assert reading.quality is Quality.LOW_PERFUSION


def test_zero_dc_no_division_crash():
    zeros = np.zeros(int(5 * FS))
    reading = spo2_from_window(_window(zeros, zeros))
    assert reading.quality is Quality.LOW_PERFUSION
    assert math.isnan(reading.value)


def test_window_too_short_raises():
    t = np.arange(int(2 * FS)) / FS
    sig = 5000.0 + 300.0 * np.sin(2 * np.pi * 1.2 * t)
    with pytest.raises(WindowError):
        spo2_from_window(_window(sig, sig))


@pytest.mark.parametrize("k", [0.5, 2.0, 7.3])
def test_amplitude_invariance(k):
    w = _trace_window(PhysioProfile(spo2_target=92.0, ppg_noise_sd=0.0), duration_s=6.0, seed=1)
    base = spo2_from_window(w)
    scaled = PpgWindow(t_ms=w.t_ms, red=w.red * k, ir=w.ir * k, fs_hz=w.fs_hz)
    assert spo2_from_window(scaled).value == pytest.approx(base.value, rel=1e-9)


def test_calibration_monotonicity():
    cal = Spo2Calibration()
    ratios = np.linspace(0.0, 2.0, 25)
    values = [cal.value_for_ratio(r) for r in ratios]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_calibration_invariants():
    with pytest.raises(ParameterError):
        Spo2Calibration(b=0.0)
    with pytest.raises(ParameterError):
        Spo2Calibration(clamp_lo=100.0, clamp_hi=70.0)


# ---------------------------------------------------------------- RR


def test_no_modulation_means_no_dominant_peak():
    for seed in range(3):
        w = _trace_window(PhysioProfile(resp_mod_depth=0.0), duration_s=32.0, seed=seed,
                          last_s=30.0)
        reading = rr_from_window(w)
        assert reading.quality is Quality.NO_DOMINANT_PEAK, f"seed {seed}"


def test_resp_quarter_hz_reads_15():
    w = _trace_window(PhysioProfile(resp_freq_hz=0.25), duration_s=35.0, seed=2, last_s=30.0)
    reading = rr_from_window(w)
    assert reading.quality is Quality.VALID
    assert abs(reading.value - 15.0) <= 1.0


def test_resp_lower_boundary_0_1_hz():
    w = _trace_window(PhysioProfile(resp_freq_hz=0.10), duration_s=35.0, seed=3, last_s=30.0)
    reading = rr_from_window(w)
    assert reading.quality is Quality.VALID
    assert abs(reading.value - 6.0) <= 1.0


def test_rr_window_too_short():
    w = _trace_window(PhysioProfile(), duration_s=20.0, seed=0)
    with pytest.raises(WindowError):
        rr_from_window(w)


def test_rr_value_always_within_band_when_valid():
    for seed in range(4):
        w = _trace_window(PhysioProfile(resp_freq_hz=0.05 + 0.1 * seed), duration_s=31.0,
                          seed=seed, last_s=30.0)
        reading = rr_from_window(w)
        if reading.quality is Quality.VALID:
            assert 6.0 <= reading.value <= 30.0


# ---------------------------------------------------------------- HR


def test_constant_signal_has_no_beats():
    flat = np.full(int(5 * FS), 30000.0)
    reading = hr_from_window(_window(flat.copy(), flat.copy()))
    assert reading.quality is Quality.NO_BEATS


def test_hr_60_clean():
    w = _trace_window(PhysioProfile(hr_bpm=60.0, ppg_noise_sd=0.0), duration_s=8.0, seed=0,
                      last_s=4.0)
    reading = hr_from_window(w)
    assert reading.quality is Quality.VALID
    assert abs(reading.value - 60.0) <= 1.0


def test_hr_120_noisy():
    values = []
    for seed in range(6):
        w = _trace_window(PhysioProfile(hr_bpm=120.0), duration_s=8.0, seed=seed, last_s=4.0)
        reading = hr_from_window(w)
        assert reading.quality is Quality.VALID
        values.append(reading.value)
    assert abs(float(np.mean(values)) - 120.0) <= 2.0


def test_hr_window_too_short():
    w = _trace_window(PhysioProfile(), duration_s=2.0, seed=0)
    with pytest.raises(WindowError):
        hr_from_window(w)


# ---------------------------------------------------------------- window type


def test_ppg_window_spacing_validation():
    with pytest.raises(ParameterError):
        PpgWindow(t_ms=[0, 10, 40], red=[1, 2, 3], ir=[1, 2, 3], fs_hz=100.0)
    with pytest.raises(ParameterError):
        PpgWindow(t_ms=[0, 10, 10], red=[1, 2, 3], ir=[1, 2, 3], fs_hz=100.0)


def test_estimators_are_total_over_noise_only_windows():
    rng = np.random.default_rng(11)
    red = np.clip(rng.normal(30000, 50, int(31 * FS)), 0, 65535)
    ir = np.clip(rng.normal(30000, 50, int(31 * FS)), 0, 65535)
    w = _window(red, ir)
    for estimator in (spo2_from_window, rr_from_window, hr_from_window):
        reading = estimator(w)
        assert reading.quality in set(Quality)
