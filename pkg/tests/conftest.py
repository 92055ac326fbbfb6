"""Shared oracles and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from pulmobell.session.types import Regimen
from pulmobell.sim.profiles import (
    AirConditions,
    EffortProfile,
    PhysioProfile,
    ScenarioScript,
    TimelineChange,
)


def crc16_bitwise(data: bytes) -> int:
    """Independent shift-register CRC-16/CCITT-FALSE oracle (bit at a time)."""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


def offline_rep_count(z_mg: np.ndarray, fs_hz: float, period_s: float) -> int:
    """Offline oracle: count lift cycles on the full trace.

    Zero-phase band-limits the vertical axis around the repetition rate and
    counts prominent peaks; independent of the streaming hysteresis path.
    """
    from scipy.signal import find_peaks

    x = np.asarray(z_mg, dtype=float)
    x = x - np.mean(x)
    n = len(x)
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs_hz)
    f0 = 1.0 / period_s
    keep = (freqs >= 0.5 * f0) & (freqs <= 2.0 * f0)
    spectrum[~keep] = 0.0
    y = np.fft.irfft(spectrum, n=n)
    amp = np.percentile(np.abs(y), 95)
    peaks, _ = find_peaks(y, distance=int(0.7 * period_s * fs_hz), height=0.5 * amp)
    return len(peaks)


def sine_component_amplitude(x: np.ndarray, fs_hz: float, freq_hz: float) -> float:
    """Least-squares amplitude of one sinusoidal component in x."""
    t = np.arange(len(x)) / fs_hz
    basis = np.column_stack([np.sin(2 * np.pi * freq_hz * t), np.cos(2 * np.pi * freq_hz * t)])
    coef, *_ = np.linalg.lstsq(basis, np.asarray(x, float), rcond=None)
    return float(np.hypot(coef[0], coef[1]))


def clean_scenario(
    sets: int = 3,
    rest_s: float = 10.0,
    level: int = 2,
    seed: int = 42,
    accel_noise: float = 0.0,
    **physio_kwargs,
) -> ScenarioScript:
    """A well-behaved session scenario with the intensity ladder pinned."""
    return ScenarioScript(
        seed=seed,
        regimen=Regimen(sets=sets, rest_s=rest_s, start_level=level, max_level=level),
        physio=PhysioProfile(**physio_kwargs),
        effort=EffortProfile(
            rep_period_s=4.0, rep_amplitude_mg=400.0, accel_noise_sd_mg=accel_noise
        ),
        air=AirConditions(pm25=8.0, pm10=20.0),
    )


@pytest.fixture
def tmp_store(tmp_path):
    from pulmobell.host.store import SessionStore

    store = SessionStore(tmp_path / "data")
    yield store
    store.close()


__all__ = [
    "crc16_bitwise",
    "offline_rep_count",
    "sine_component_amplitude",
    "clean_scenario",
    "AirConditions",
    "EffortProfile",
    "PhysioProfile",
    "ScenarioScript",
    "TimelineChange",
    "Regimen",
]
