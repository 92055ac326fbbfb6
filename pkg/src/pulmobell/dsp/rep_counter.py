"""Streaming repetition detector for the lifting accelerometer.

Gravity is tracked with an exponential moving average of the raw vector;
the detection signal is |a| - |g_est| smoothed by a short moving average.
A repetition is one hysteresis cycle: the signal crosses above theta_up,
later crosses below theta_down, and the above-to-below interval falls in
[rep_min_s, rep_max_s]. A refractory hold-off after each emitted event
suppresses re-triggers. O(1) work per sample.
"""

from __future__ import annotations

import math
from collections import deque

from ..errors import InputOrderError
from .types import AccelSample, RepCounterConfig, RepEvent


class RepCounter:
    def __init__(self, config: RepCounterConfig | None = None) -> None:
        self.config = config or RepCounterConfig()
        n = max(1, round(self.config.smooth_window_s * self.config.fs_hz))
        self._window: deque[float] = deque(maxlen=n)
        self._window_sum = 0.0
        self._g: tuple[float, float, float] | None = None
        self._last_t_ms: int | None = None
        self._armed = False
        self._armed_at_s = 0.0
        self._peak_mg = 0.0
        self._refractory_until_s = -math.inf
        self.count = 0

    def step(self, s: AccelSample) -> RepEvent | None:
        """Consume one sample; return a RepEvent when a rep completes."""
        if self._last_t_ms is not None and s.t_ms <= self._last_t_ms:
            raise InputOrderError(f"timestamp {s.t_ms} not after {self._last_t_ms}")
        self._last_t_ms = s.t_ms

        cfg = self.config
        if self._g is None:
            self._g = (s.x, s.y, s.z)
        else:
            a = cfg.gravity_ema_alpha
            gx, gy, gz = self._g
            self._g = (
                gx + a * (s.x - gx),
                gy + a * (s.y - gy),
                gz + a * (s.z - gz),
            )
        magnitude = math.sqrt(s.x * s.x + s.y * s.y + s.z * s.z)
        gravity = math.sqrt(sum(c * c for c in self._g))
        raw = magnitude - gravity

        if len(self._window) == self._window.maxlen:
            self._window_sum -= self._window[0]
        self._window.append(raw)
        self._window_sum += raw
        signal = self._window_sum / len(self._window)

        t_s = s.t_ms / 1000.0
        if not self._armed:
            if signal > cfg.theta_up_mg and t_s >= self._refractory_until_s:
                self._armed = True
                self._armed_at_s = t_s
                self._peak_mg = signal
            return None

        self._peak_mg = max(self._peak_mg, signal)
        if signal >= cfg.theta_down_mg:
            return None
        self._armed = False
        duration = t_s - self._armed_at_s
        if not cfg.rep_min_s <= duration <= cfg.rep_max_s:
            return None
        self.count += 1
        self._refractory_until_s = t_s + cfg.refractory_s
        return RepEvent(t_ms=s.t_ms, duration_s=duration, peak_mg=self._peak_mg)


def rep_counter_step(state: RepCounter, s: AccelSample) -> tuple[RepCounter, RepEvent | None]:
    """Functional facade over :meth:`RepCounter.step`."""
    return state, state.step(s)
