"""PulmoBell: a sensor-dumbbell home pulmonary-rehabilitation stack.

Subpackages:
  dsp       - streaming estimators (reps, SpO2, respiratory rate, heart rate)
  session   - adaptive exercise state machine and summaries
  protocol  - framed binary telemetry link
  sim       - scriptable device simulator and signal generators
  host      - persistence, HTTP/WebSocket API, device TCP port
"""

__version__ = "0.1.0"
