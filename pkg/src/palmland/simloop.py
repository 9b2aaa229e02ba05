"""Fixed-step simulation loop over user motion, gesture, planner, and plant.

Three nested rates, all derived from integer step counts so time never
accumulates float error: physics substeps inside each control step, and one
planner/gesture tick every few control steps. Each control step appends one
trace row. With the same inputs and seed the produced CSV is byte-identical
run to run; that property is load-bearing for regression tests.

Two plant modes: "dynamic" runs the controller and rigid-body physics;
"ideal" teleports the drone onto each setpoint, isolating planner behaviour
from tracking error.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .config import RunConfig
from .dynamics import Controller, FlappingBody, ideal_tracking_step
from .geom import DroneState, GeometryError, Pose, UserModel, Vec3, quat_from_yaw
from .gesture import GestureState, chest_hand_distance, classify
from .metrics import format_trace_row, trace_header
from .planner import (
    ConfigError,
    MissionPhase,
    Planner,
    WorldState,
    goal_yaw_toward_chest,
)
from .scenario import Scenario, UserTrace, sample_user

MODES = ("dynamic", "ideal")
REPLAY_START_DISTANCE = 2.5  # drone spawn distance in front of the user [m]


@dataclass(frozen=True)
class RunResult:
    lines: tuple[str, ...]  # header plus one line per control step
    final_phase: MissionPhase
    rows: int
    out_path: Path | None


def _measured_user(user: UserModel, jitter: float, rng: random.Random) -> UserModel:
    """Sensor view of the user: uniform position jitter, orientations exact."""
    if jitter <= 0.0:
        return user
    dc = Vec3(rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
              rng.uniform(-jitter, jitter))
    dp = Vec3(rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter),
              rng.uniform(-jitter, jitter))
    return UserModel(
        chest=Pose(user.chest.position + dc, user.chest.orientation),
        palm=Pose(user.palm.position + dp, user.palm.orientation),
        arm_length=user.arm_length,
        elbow_height=user.elbow_height,
        eye_height=user.eye_height,
    )


def run_sim(user_at: Callable[[float], UserModel], duration: float,
            cfg: RunConfig, mode: str = "dynamic", seed: int = 0,
            drone_start: Vec3 = Vec3(), out_path: str | Path | None = None,
            ) -> RunResult:
    """Run one session and return (optionally also write) its trace."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got '{mode}'")
    if duration <= 0.0:
        raise ValueError("duration must be > 0")
    ctrl_dt = 1.0 / cfg.controller.control_rate
    per_tick_f = cfg.planner.tick_dt * cfg.controller.control_rate
    per_tick = round(per_tick_f)
    if per_tick < 1 or abs(per_tick_f - per_tick) > 1e-9:
        raise ConfigError(
            "planner tick_dt must be an integer multiple of the control period"
        )
    phys_dt = 1.0 / cfg.controller.physics_rate
    n_ctrl = round(duration / ctrl_dt)

    rng = random.Random(seed)
    planner = Planner(cfg.planner)
    controller = Controller(cfg.controller, cfg.drone)

    user = user_at(0.0)
    try:
        yaw0 = goal_yaw_toward_chest(drone_start, user.chest.position)
    except GeometryError:
        yaw0 = 0.0
    state = DroneState(
        position=drone_start, velocity=Vec3(),
        orientation=quat_from_yaw(yaw0), angular_velocity=Vec3(),
    )
    body = FlappingBody(cfg.drone, state) if mode == "dynamic" else None

    planner.command_takeoff()
    gesture_state = GestureState()
    setpoint = None
    lines = [trace_header()]

    for i in range(n_ctrl):
        t = i * ctrl_dt
        if i % per_tick == 0:
            user = _measured_user(user_at(t), cfg.sensor_jitter_m, rng)
            d_hand = chest_hand_distance(user)
            gesture_state = classify(d_hand, gesture_state, t, cfg.gesture)
            world = WorldState(t=t, user=user, drone=state)
            setpoint = planner.step(world, gesture_state)
            if mode == "ideal":
                state = ideal_tracking_step(state, setpoint, cfg.planner.tick_dt)
        status = planner.last_status
        lines.append(format_trace_row(
            t, state.position.as_tuple(), setpoint.goal_position.as_tuple(),
            state.yaw(), setpoint.goal_yaw,
            user.chest.position.as_tuple(), user.palm.position.as_tuple(),
            status.phase.value, status.domain.value, status.gesture.value,
            setpoint.commanded_speed,
        ))
        if status.phase is MissionPhase.LANDED:
            break
        if mode == "dynamic":
            wrench = controller.control_step(state, setpoint)
            state = body.step(wrench, phys_dt, cfg.controller.substeps)

    path = None
    if out_path is not None:
        path = Path(out_path)
        path.write_text("\n".join(lines) + "\n")
    return RunResult(
        lines=tuple(lines),
        final_phase=planner.phase,
        rows=len(lines) - 1,
        out_path=path,
    )


def run_scenario(scn: Scenario, cfg: RunConfig, mode: str = "dynamic",
                 seed: int | None = None, duration_override: float | None = None,
                 out_path: str | Path | None = None) -> RunResult:
    duration = duration_override if duration_override is not None else scn.duration_s
    return run_sim(
        user_at=lambda t: sample_user(scn, t),
        duration=duration,
        cfg=cfg,
        mode=mode,
        seed=scn.seed if seed is None else seed,
        drone_start=Vec3(scn.drone_start_xy[0], scn.drone_start_xy[1],
                         scn.drone_start_z),
        out_path=out_path,
    )


def replay_start_position(trace: UserTrace) -> Vec3:
    """Ground spawn point in front of the user, along the chest-to-palm
    bearing of the first sample (falling back to +x if degenerate).
    """
    user = trace.sample(trace.t[0])
    chest = user.chest.position
    palm = user.palm.position
    dx = palm.x - chest.x
    dy = palm.y - chest.y
    norm = (dx * dx + dy * dy) ** 0.5
    if norm < 1e-9:
        ux, uy = 1.0, 0.0
    else:
        ux, uy = dx / norm, dy / norm
    return Vec3(chest.x + ux * REPLAY_START_DISTANCE,
                chest.y + uy * REPLAY_START_DISTANCE, 0.0)


def run_replay(trace: UserTrace, cfg: RunConfig, mode: str = "dynamic",
               seed: int = 0, duration_override: float | None = None,
               out_path: str | Path | None = None) -> RunResult:
    duration = duration_override if duration_override is not None else trace.duration
    if duration <= 0.0:
        raise ValueError("trace too short; pass a positive duration override")
    return run_sim(
        user_at=lambda t: trace.sample(t),
        duration=duration,
        cfg=cfg,
        mode=mode,
        seed=seed,
        drone_start=replay_start_position(trace),
        out_path=out_path,
    )
