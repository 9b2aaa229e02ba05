"""Run configuration: one JSON file overriding any subset of the defaults.

Layout mirrors the subsystems:

    {
      "planner":    {"weber_gain": 0.2, ...},
      "gesture":    {"threshold": 0.3, ...},
      "drone":      {"mass": 0.1, ...},
      "controller": {"pos_kp": [4, 4, 8], ...},
      "sensor_jitter_m": 0.0
    }

Every section and field is optional; unknown names are rejected with the
offending key in the message rather than silently ignored.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .dynamics import ControllerConfig, DroneParams
from .gesture import GestureConfig
from .planner import ConfigError, PlannerConfig

_SECTIONS = {
    "planner": PlannerConfig,
    "gesture": GestureConfig,
    "drone": DroneParams,
    "controller": ControllerConfig,
}


@dataclass(frozen=True)
class RunConfig:
    planner: PlannerConfig
    gesture: GestureConfig
    drone: DroneParams
    controller: ControllerConfig
    sensor_jitter_m: float = 0.0

    def __post_init__(self):
        if self.sensor_jitter_m < 0.0:
            raise ConfigError("sensor_jitter_m must be >= 0")


def default_run_config() -> RunConfig:
    return RunConfig(
        planner=PlannerConfig(),
        gesture=GestureConfig(),
        drone=DroneParams(),
        controller=ControllerConfig(),
    )


def _build_section(cls, data: dict, section: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            known = ", ".join(sorted(fields))
            raise ConfigError(
                f"config section '{section}': unknown field '{key}' "
                f"(known: {known})"
            )
        if isinstance(value, list):
            value = tuple(value)
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(
                f"config section '{section}': field '{key}' must be a number"
                " or list of numbers"
            )
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config section '{section}': {exc}") from exc


def run_config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config top level must be an object")
    sections = {}
    jitter = 0.0
    for key, value in data.items():
        if key == "sensor_jitter_m":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("sensor_jitter_m must be a number")
            jitter = float(value)
            continue
        if key not in _SECTIONS:
            known = ", ".join(sorted(_SECTIONS) + ["sensor_jitter_m"])
            raise ConfigError(f"unknown config section '{key}' (known: {known})")
        if not isinstance(value, dict):
            raise ConfigError(f"config section '{key}' must be an object")
        sections[key] = _build_section(_SECTIONS[key], value, key)
    return RunConfig(
        planner=sections.get("planner", PlannerConfig()),
        gesture=sections.get("gesture", GestureConfig()),
        drone=sections.get("drone", DroneParams()),
        controller=sections.get("controller", ControllerConfig()),
        sensor_jitter_m=jitter,
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return run_config_from_dict(data)
