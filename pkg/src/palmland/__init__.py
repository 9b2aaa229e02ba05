"""Deterministic simulator for gesture-gated palm landings of a
flapping-wing drone.

The public surface: geometry and user/drone state types, the arm-gesture
classifier, the four-domain approach planner, the plant and controller, the
scenario/replay loaders, the simulation loop, and trace metrics. The CLI
(`palmland`) and the live websocket bridge sit on top of these.
"""

from .geom import DroneState, GeometryError, Pose, UserModel, Vec3
from .gesture import Gesture, GestureConfig, GestureState, classify
from .planner import (
    ConfigError,
    Domain,
    MissionPhase,
    Planner,
    PlannerConfig,
    PlannerStatus,
    Setpoint,
    StateMachineError,
    WorldState,
)
from .dynamics import (
    Controller,
    ControllerConfig,
    DroneParams,
    FlappingBody,
    SimulationDiverged,
    Wrench,
    ideal_tracking_step,
    physics_step,
)
from .config import RunConfig, default_run_config, load_run_config
from .scenario import (
    Scenario,
    ScenarioError,
    TraceFormatError,
    UserTrace,
    load_builtin_scenario,
    load_scenario,
    load_user_trace,
    sample_user,
)
from .simloop import RunResult, run_replay, run_scenario, run_sim
from .metrics import (
    MetricsError,
    MetricsReport,
    RunTrace,
    compute_report,
    estimate_delay,
    load_run_trace,
    rmse,
    safety_audit,
)

__version__ = "0.1.0"

__all__ = [
    "Controller",
    "ControllerConfig",
    "ConfigError",
    "Domain",
    "DroneParams",
    "DroneState",
    "FlappingBody",
    "GeometryError",
    "Gesture",
    "GestureConfig",
    "GestureState",
    "MetricsError",
    "MetricsReport",
    "MissionPhase",
    "Planner",
    "PlannerConfig",
    "PlannerStatus",
    "Pose",
    "RunConfig",
    "RunResult",
    "RunTrace",
    "Scenario",
    "ScenarioError",
    "Setpoint",
    "SimulationDiverged",
    "StateMachineError",
    "TraceFormatError",
    "UserModel",
    "UserTrace",
    "Vec3",
    "WorldState",
    "Wrench",
    "classify",
    "compute_report",
    "default_run_config",
    "estimate_delay",
    "ideal_tracking_step",
    "load_builtin_scenario",
    "load_run_config",
    "load_run_trace",
    "load_scenario",
    "load_user_trace",
    "physics_step",
    "rmse",
    "run_replay",
    "run_scenario",
    "run_sim",
    "safety_audit",
    "sample_user",
]
