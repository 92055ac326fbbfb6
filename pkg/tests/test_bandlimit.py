import numpy as np
import pytest

from conftest import sine_component_amplitude
from pulmobell.dsp import bandlimit
from pulmobell.errors import ParameterError

FS = 100.0


def test_zero_sequence_stays_zero():
    out = bandlimit(np.zeros(1000), FS, 0.5, 5.0)
    assert np.allclose(out, 0.0)
    assert len(out) == 1000


def test_output_length_matches_input():
    for n in (100, 101, 999):
        assert len(bandlimit(np.random.default_rng(0).normal(size=n), FS, 0.5, 5.0)) == n


def test_in_band_sinusoid_preserved():
    t = np.arange(int(30 * FS)) / FS
    x = np.sin(2 * np.pi * 1.0 * t)
    y = bandlimit(x, FS, 0.5, 5.0)
    rms_err = np.sqrt(np.mean((y - x) ** 2)) / np.sqrt(np.mean(x**2))
    assert rms_err < 0.05


@pytest.mark.parametrize("duration_s", [20.0, 40.0])
def test_mixture_suppresses_out_of_band_component(duration_s):
    # windows long enough to resolve 0.05 Hz (integer cycles per window)
    t = np.arange(int(duration_s * FS)) / FS
    slow_amp = 2.0
    x = np.sin(2 * np.pi * 1.0 * t) + slow_amp * np.sin(2 * np.pi * 0.05 * t)
    y = bandlimit(x, FS, 0.5, 5.0)
    residual = sine_component_amplitude(y, FS, 0.05)
    assert residual <= 0.01 * slow_amp


def test_mixture_worst_case_bin_straddle_stays_small():
    # 0.05 Hz lands half-way between bins of a 30 s window; spectral
    # leakage caps the rejection near 1% for a hard FFT mask
    t = np.arange(int(30 * FS)) / FS
    x = np.sin(2 * np.pi * 1.0 * t) + 2.0 * np.sin(2 * np.pi * 0.05 * t)
    y = bandlimit(x, FS, 0.5, 5.0)
    residual = sine_component_amplitude(y, FS, 0.05)
    assert residual <= 0.025 * 2.0


def test_out_of_band_bin_centered_tone_fully_removed():
    n = 3000  # 30 s; 0.2 Hz sits exactly on a bin
    t = np.arange(n) / FS
    x = np.sin(2 * np.pi * 0.2 * t)
    y = bandlimit(x, FS, 0.5, 5.0)
    # >= 40 dB attenuation means amplitude ratio <= 0.01
    assert np.max(np.abs(y)) <= 0.01


def test_zero_phase_no_shift():
    t = np.arange(int(20 * FS)) / FS
    x = np.sin(2 * np.pi * 2.0 * t)
    y = bandlimit(x, FS, 0.5, 5.0)
    lag = np.argmax(np.correlate(y[100:-100], x[100:-100], mode="full")) - (len(x) - 201)
    assert abs(lag) <= 1


@pytest.mark.parametrize(
    "fs,lo,hi",
    [
        (100.0, 5.0, 0.5),   # lo >= hi
        (100.0, -0.1, 5.0),  # negative lo
        (100.0, 0.5, 50.0),  # fs <= 2*hi
        (8.0, 0.5, 5.0),     # undersampled
    ],
)
def test_parameter_errors(fs, lo, hi):
    with pytest.raises(ParameterError):
        bandlimit(np.zeros(100), fs, lo, hi)
