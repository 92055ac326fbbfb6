"""Window-based vitals estimators: SpO2, respiratory rate, heart rate.

All three are total over well-formed windows: degraded inputs yield a
typed quality flag, never an exception. Window-length preconditions are
the only raising paths (WindowError).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import find_peaks

from ..errors import WindowError
from .filters import bandlimit
from .types import PpgWindow, Quality, Spo2Calibration, VitalKind, VitalsReading

SPO2_WINDOW_S = 4.0
HR_WINDOW_S = 4.0
RR_WINDOW_S = 30.0

PULSE_BAND_HZ = (0.5, 5.0)
HR_BAND_HZ = (0.7, 3.5)
RR_BAND_HZ = (0.1, 0.5)

PERFUSION_FLOOR = 0.001
RR_MAX_BIN_HZ = 0.005
RR_SEGMENTS = 3
RR_DOMINANCE = 8.0
HR_MIN_PEAK_SEPARATION_S = 0.3
HR_MIN_BEATS = 3
HR_RANGE = (40.0, 180.0)


def _ac_spread(x: np.ndarray) -> float:
    """Robust AC amplitude: 5th-to-95th percentile spread."""
    return float(np.percentile(x, 95) - np.percentile(x, 5))


def spo2_from_window(w: PpgWindow, cal: Spo2Calibration | None = None) -> VitalsReading:
    """Ratio-of-ratios oximetry over a window of at least 4 s."""
    cal = cal or Spo2Calibration()
    if w.duration_s < SPO2_WINDOW_S:
        raise WindowError(f"SpO2 needs >= {SPO2_WINDOW_S} s, got {w.duration_s:.2f} s")
    t_ms = w.end_t_ms

    def perfusion(channel: np.ndarray) -> float | None:
        dc = float(np.mean(channel))
        if dc <= 0.0:
            return None
        ac = _ac_spread(bandlimit(channel - dc, w.fs_hz, *PULSE_BAND_HZ))
        return ac / dc

    perf_red = perfusion(w.red)
    perf_ir = perfusion(w.ir)
    if perf_red is None or perf_ir is None:
        return VitalsReading(t_ms, VitalKind.SPO2, math.nan, Quality.LOW_PERFUSION)
    if perf_ir < PERFUSION_FLOOR:
        value = cal.clamp(cal.value_for_ratio(perf_red / perf_ir)) if perf_ir > 0 else math.nan
        return VitalsReading(t_ms, VitalKind.SPO2, value, Quality.LOW_PERFUSION)
    value = cal.clamp(cal.value_for_ratio(perf_red / perf_ir))
    return VitalsReading(t_ms, VitalKind.SPO2, value, Quality.VALID)


def rr_from_window(w: PpgWindow) -> VitalsReading:
    """Respiratory rate from amplitude modulation of the IR channel.

    The mean-removed IR signal is band-limited to 0.1-0.5 Hz; the spectrum
    is estimated by averaging zero-padded periodograms of three subwindows
    (bin width <= 0.005 Hz). The in-band peak gives 60*f breaths/min; if
    the peak is below 8x the in-band median power there is no dominant
    respiratory line and the reading is flagged NoDominantPeak.
    """
    if w.duration_s < RR_WINDOW_S:
        raise WindowError(f"RR needs >= {RR_WINDOW_S} s, got {w.duration_s:.2f} s")
    t_ms = w.end_t_ms
    x = w.ir - float(np.mean(w.ir))
    xb = bandlimit(x, w.fs_hz, *RR_BAND_HZ)

    nfft = 1
    while w.fs_hz / nfft > RR_MAX_BIN_HZ:
        nfft *= 2
    seg_len = len(xb) // RR_SEGMENTS
    nfft = max(nfft, 1 << int(np.ceil(np.log2(max(seg_len, 2)))))
    power = np.zeros(nfft // 2 + 1)
    for k in range(RR_SEGMENTS):
        seg = xb[k * seg_len : (k + 1) * seg_len]
        power += np.abs(np.fft.rfft(seg, n=nfft)) ** 2
    power /= RR_SEGMENTS

    freqs = np.fft.rfftfreq(nfft, d=1.0 / w.fs_hz)
    band = (freqs >= RR_BAND_HZ[0]) & (freqs <= RR_BAND_HZ[1])
    in_band = power[band]
    peak_idx = int(np.argmax(in_band))
    peak = float(in_band[peak_idx])
    median = float(np.median(in_band))
    if median <= 0.0 or peak < RR_DOMINANCE * median:
        return VitalsReading(t_ms, VitalKind.RESP_RATE, math.nan, Quality.NO_DOMINANT_PEAK)
    value = 60.0 * float(freqs[band][peak_idx])
    return VitalsReading(t_ms, VitalKind.RESP_RATE, value, Quality.VALID)


def hr_from_window(w: PpgWindow) -> VitalsReading:
    """Heart rate as 60 / median inter-beat interval of IR-channel peaks."""
    if w.duration_s < HR_WINDOW_S:
        raise WindowError(f"HR needs >= {HR_WINDOW_S} s, got {w.duration_s:.2f} s")
    t_ms = w.end_t_ms
    xb = bandlimit(w.ir - float(np.mean(w.ir)), w.fs_hz, *HR_BAND_HZ)
    spread = _ac_spread(xb)
    if spread <= 0.0:
        return VitalsReading(t_ms, VitalKind.HEART_RATE, math.nan, Quality.NO_BEATS)
    peaks, _ = find_peaks(
        xb,
        distance=max(1, round(HR_MIN_PEAK_SEPARATION_S * w.fs_hz)),
        prominence=0.3 * spread,
    )
    if len(peaks) < HR_MIN_BEATS:
        return VitalsReading(t_ms, VitalKind.HEART_RATE, math.nan, Quality.NO_BEATS)
    ibi_s = float(np.median(np.diff(peaks))) / w.fs_hz
    value = 60.0 / ibi_s
    quality = Quality.VALID if HR_RANGE[0] <= value <= HR_RANGE[1] else Quality.OUT_OF_RANGE
    return VitalsReading(t_ms, VitalKind.HEART_RATE, value, quality)
