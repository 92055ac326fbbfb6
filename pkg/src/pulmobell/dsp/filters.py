"""Zero-phase frequency-domain band filtering."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError


def bandlimit(series, fs_hz: float, lo_hz: float, hi_hz: float) -> np.ndarray:
    """Keep only spectral content in [lo_hz, hi_hz]; zero phase shift.

    Transforms, zeroes out-of-band bins, and inverse-transforms, so the
    output has the same length as the input. Requires fs_hz > 2 * hi_hz
    and 0 <= lo_hz < hi_hz.
    """
    if not 0.0 <= lo_hz < hi_hz:
        raise ParameterError(f"need 0 <= lo_hz < hi_hz, got {lo_hz}, {hi_hz}")
    if fs_hz <= 2.0 * hi_hz:
        raise ParameterError(f"need fs_hz > 2*hi_hz, got fs={fs_hz}, hi={hi_hz}")
    x = np.asarray(series, dtype=np.float64)
    n = x.size
    if n == 0:
        return x.copy()
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, d=1.0 / fs_hz)
    spectrum[(freqs < lo_hz) | (freqs > hi_hz)] = 0.0
    return np.fft.irfft(spectrum, n=n)
