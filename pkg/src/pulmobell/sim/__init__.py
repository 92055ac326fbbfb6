from .profiles import (
    AirConditions,
    EffortProfile,
    PhysioProfile,
    ScenarioScript,
    SteeringCommand,
    TimelineChange,
    load_scenario,
    scenario_from_dict,
)
from .generators import AccelSource, PpgSource, gen_accel_trace, gen_ppg_trace
from .device import DeviceRunReport, DeviceSimulator, run_device

__all__ = [
    "PhysioProfile",
    "EffortProfile",
    "AirConditions",
    "TimelineChange",
    "ScenarioScript",
    "SteeringCommand",
    "load_scenario",
    "scenario_from_dict",
    "PpgSource",
    "AccelSource",
    "gen_ppg_trace",
    "gen_accel_trace",
    "DeviceSimulator",
    "DeviceRunReport",
    "run_device",
]
