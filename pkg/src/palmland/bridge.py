"""Live operator bridge: the simulator behind a websocket.

One process runs the dynamic simulation in (scaled) wall time and exposes
it at /ws plus a /healthz probe. The first websocket client becomes the
controller and may send commands; later clients observe. All messages are
JSON objects with a protocol version tag:

    {"v": 1, "type": "state", ...}            server -> everyone, ~30 Hz
    {"v": 1, "type": "cmd", "action": ...}    controller -> server
    {"v": 1, "type": "ack", "id": ...}        server reply, command applied
    {"v": 1, "type": "err", "id": ..., "error": ...}

Commands: takeoff, reset, set_arm {stretched}, set_user_velocity {vx, vy}
(capped at MAX_USER_SPEED), set_param {name, value} for the whitelisted
tunables k_prime, d_th and r_v. Commands take effect at the next planner
tick, never mid-tick. If the controller disconnects the user model fails
safe: walking stops and the arm bends, which reads as STAY.

The scenario argument supplies the user's geometry and the drone's start;
its scripted timeline is ignored here because the operator is the user.
"""

from __future__ import annotations

import asyncio
import contextlib
import dataclasses
import json
import math

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import RunConfig, default_run_config
from .dynamics import Controller, FlappingBody
from .geom import DroneState, GeometryError, Pose, UserModel, Vec3, quat_from_yaw
from .gesture import GestureState, chest_hand_distance, classify
from .planner import (
    ConfigError,
    MissionPhase,
    Planner,
    StateMachineError,
    WorldState,
    goal_yaw_toward_chest,
)
from .scenario import ARM_RAMP_S, BEND_PALM_DROP, Scenario, load_builtin_scenario

PROTOCOL_VERSION = 1
BROADCAST_HZ = 30.0
MAX_USER_SPEED = 2.0  # cap on operator-driven walking [m/s]

# Wire names for the three live-tunable parameters. They are part of the
# client protocol; the config field names differ on purpose.
PARAM_MAP = {
    "k_prime": ("planner", "weber_gain"),
    "d_th": ("gesture", "threshold"),
    "r_v": ("planner", "comfort_radius"),
}


class _LiveUser:
    """Operator-driven user: walks at a commanded velocity, the arm blends
    between bent and stretched just like the scripted scenarios.
    """

    def __init__(self, scn: Scenario):
        u = scn.user
        self.geom = u
        self.x, self.y = u.chest_xy
        self.vx = 0.0
        self.vy = 0.0
        self.stretched = False
        self._blend_from = (u.bend_offset, u.chest_z - BEND_PALM_DROP)
        self._blend_start = -ARM_RAMP_S  # already settled at t=0

    def _target(self) -> tuple[float, float]:
        u = self.geom
        if self.stretched:
            return (u.arm_length, u.palm_raise_z)
        return (u.bend_offset, u.chest_z - BEND_PALM_DROP)

    def _offset(self, t: float) -> tuple[float, float]:
        fx, fz = self._blend_from
        tx, tz = self._target()
        frac = min(max((t - self._blend_start) / ARM_RAMP_S, 0.0), 1.0)
        return (fx + (tx - fx) * frac, fz + (tz - fz) * frac)

    def set_arm(self, stretched: bool, t: float) -> None:
        if stretched == self.stretched:
            return
        self._blend_from = self._offset(t)
        self._blend_start = t
        self.stretched = stretched

    def set_velocity(self, vx: float, vy: float) -> None:
        speed = math.hypot(vx, vy)
        if speed > MAX_USER_SPEED:
            scale = MAX_USER_SPEED / speed
            vx *= scale
            vy *= scale
        self.vx = vx
        self.vy = vy

    def advance(self, dt: float) -> None:
        self.x += self.vx * dt
        self.y += self.vy * dt

    def sample(self, t: float) -> UserModel:
        u = self.geom
        fwd, palm_z = self._offset(t)
        q = quat_from_yaw(u.chest_yaw)
        palm = Vec3(self.x + fwd * math.cos(u.chest_yaw),
                    self.y + fwd * math.sin(u.chest_yaw),
                    palm_z)
        return UserModel(
            chest=Pose(Vec3(self.x, self.y, u.chest_z), q),
            palm=Pose(palm, q),
            arm_length=u.arm_length,
            elbow_height=u.elbow_height,
            eye_height=u.eye_height,
        )


class LiveSim:
    """Simulation state plus client bookkeeping for the bridge."""

    def __init__(self, cfg: RunConfig, scn: Scenario):
        self.cfg = cfg
        self.scn = scn
        self.ctrl_dt = 1.0 / cfg.controller.control_rate
        self.per_tick = round(cfg.planner.tick_dt * cfg.controller.control_rate)
        self.phys_dt = 1.0 / cfg.controller.physics_rate
        self.step_index = 0
        self.user = _LiveUser(scn)
        self.planner = Planner(cfg.planner)
        self.controller = Controller(cfg.controller, cfg.drone)
        self.gesture_state = GestureState()
        self.setpoint = None
        self.user_model = self.user.sample(0.0)
        self._reset_drone()

    def _reset_drone(self) -> None:
        start = Vec3(self.scn.drone_start_xy[0], self.scn.drone_start_xy[1],
                     self.scn.drone_start_z)
        chest = self.user.sample(self.t)
        try:
            yaw0 = goal_yaw_toward_chest(start, chest.chest.position)
        except GeometryError:
            yaw0 = 0.0
        self.state = DroneState(position=start, velocity=Vec3(),
                                orientation=quat_from_yaw(yaw0),
                                angular_velocity=Vec3())
        self.body = FlappingBody(self.cfg.drone, self.state, t0=self.t)

    @property
    def t(self) -> float:
        return self.step_index * self.ctrl_dt

    def reset(self) -> None:
        self.planner.reset()
        self.controller.reset()
        self.user.set_velocity(0.0, 0.0)
        self.gesture_state = GestureState(last_transition_t=self.t,
                                          pending_since=self.t)
        self.setpoint = None
        self._reset_drone()

    def failsafe(self) -> None:
        """Controller client gone: stop walking, bend the arm."""
        self.user.set_velocity(0.0, 0.0)
        self.user.set_arm(False, self.t)

    def apply_command(self, action: str, payload: dict) -> None:
        """Raises ValueError/ConfigError/StateMachineError on bad commands."""
        t = self.t
        if action == "takeoff":
            self.planner.command_takeoff()
        elif action == "reset":
            self.reset()
        elif action == "set_arm":
            stretched = payload.get("stretched")
            if not isinstance(stretched, bool):
                raise ValueError("set_arm needs boolean 'stretched'")
            self.user.set_arm(stretched, t)
        elif action == "set_user_velocity":
            vx = payload.get("vx", 0.0)
            vy = payload.get("vy", 0.0)
            if (isinstance(vx, bool) or isinstance(vy, bool)
                    or not isinstance(vx, (int, float))
                    or not isinstance(vy, (int, float))
                    or not (math.isfinite(vx) and math.isfinite(vy))):
                raise ValueError("set_user_velocity needs finite numbers vx, vy")
            self.user.set_velocity(float(vx), float(vy))
        elif action == "set_param":
            self._set_param(payload)
        else:
            raise ValueError(f"unknown action '{action}'")

    def _set_param(self, payload: dict) -> None:
        name = payload.get("name")
        value = payload.get("value")
        if name not in PARAM_MAP:
            known = ", ".join(sorted(PARAM_MAP))
            raise ValueError(f"unknown parameter '{name}' (known: {known})")
        if (isinstance(value, bool) or not isinstance(value, (int, float))
                or not math.isfinite(value)):
            raise ValueError("set_param needs a finite numeric 'value'")
        section, field = PARAM_MAP[name]
        cfg_obj = getattr(self.cfg, section)
        # replace() re-runs the dataclass validation, so out-of-range values
        # (for example k_prime above its hard bound) are rejected here.
        new_obj = dataclasses.replace(cfg_obj, **{field: float(value)})
        self.cfg = dataclasses.replace(self.cfg, **{section: new_obj})
        if section == "planner":
            self.planner.cfg = self.cfg.planner

    def params(self) -> dict:
        return {
            "k_prime": self.cfg.planner.weber_gain,
            "d_th": self.cfg.gesture.threshold,
            "r_v": self.cfg.planner.comfort_radius,
        }

    def advance_control_step(self) -> None:
        t = self.t
        if self.step_index % self.per_tick == 0:
            self.user_model = self.user.sample(t)
            d_hand = chest_hand_distance(self.user_model)
            self.gesture_state = classify(d_hand, self.gesture_state, t,
                                          self.cfg.gesture)
            world = WorldState(t=t, user=self.user_model, drone=self.state)
            self.setpoint = self.planner.step(world, self.gesture_state)
        if self.planner.phase is not MissionPhase.LANDED:
            wrench = self.controller.control_step(self.state, self.setpoint)
            self.state = self.body.step(wrench, self.phys_dt,
                                        self.cfg.controller.substeps)
        self.user.advance(self.ctrl_dt)
        self.step_index += 1

    def snapshot(self) -> dict:
        status = self.planner.last_status
        sp = self.setpoint
        drone = self.state
        return {
            "v": PROTOCOL_VERSION,
            "type": "state",
            "t": self.t,
            "phase": (status.phase.value if status else self.planner.phase.value),
            "domain": status.domain.value if status else None,
            "gesture": (status.gesture.value if status
                        else self.gesture_state.current.value),
            "drone": {
                "x": drone.position.x, "y": drone.position.y,
                "z": drone.position.z, "yaw": drone.yaw(),
                "vx": drone.velocity.x, "vy": drone.velocity.y,
                "vz": drone.velocity.z,
            },
            "goal": None if sp is None else {
                "x": sp.goal_position.x, "y": sp.goal_position.y,
                "z": sp.goal_position.z, "yaw": sp.goal_yaw,
            },
            "cmd_speed": 0.0 if sp is None else sp.commanded_speed,
            "user": {
                "chest": {"x": self.user_model.chest.position.x,
                          "y": self.user_model.chest.position.y,
                          "z": self.user_model.chest.position.z},
                "palm": {"x": self.user_model.palm.position.x,
                         "y": self.user_model.palm.position.y,
                         "z": self.user_model.palm.position.z},
                "stretched": self.user.stretched,
            },
            "params": self.params(),
            "safety_radius": self.cfg.planner.safety_radius,
            "arm_length": self.user_model.arm_length,
        }


def create_app(cfg: RunConfig | None = None, scn: Scenario | None = None,
               time_scale: float = 1.0) -> FastAPI:
    if time_scale <= 0.0:
        raise ConfigError("time_scale must be > 0")
    cfg = cfg or default_run_config()
    scn = scn or load_builtin_scenario("approach_static")
    sim = LiveSim(cfg, scn)

    clients: dict[WebSocket, str] = {}
    pending: asyncio.Queue = asyncio.Queue()
    tasks: list[asyncio.Task] = []

    def controller_socket() -> WebSocket | None:
        for ws, role in clients.items():
            if role == "controller":
                return ws
        return None

    async def reply(ws: WebSocket, msg: dict) -> None:
        with contextlib.suppress(Exception):
            await ws.send_text(json.dumps(msg))

    async def sim_task() -> None:
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while True:
            # Commands land exactly on planner-tick boundaries.
            if sim.step_index % sim.per_tick == 0:
                while not pending.empty():
                    ws, msg = pending.get_nowait()
                    msg_id = msg.get("id")
                    try:
                        sim.apply_command(msg.get("action"), msg)
                    except (ValueError, ConfigError, StateMachineError) as exc:
                        await reply(ws, {"v": PROTOCOL_VERSION, "type": "err",
                                         "id": msg_id, "error": str(exc)})
                    else:
                        await reply(ws, {"v": PROTOCOL_VERSION, "type": "ack",
                                         "id": msg_id,
                                         "action": msg.get("action")})
            sim.advance_control_step()
            next_t += sim.ctrl_dt / time_scale
            delay = next_t - loop.time()
            if delay > 0.0:
                await asyncio.sleep(delay)
            else:
                next_t = loop.time()  # fell behind; don't try to catch up
                await asyncio.sleep(0)

    async def broadcast_task() -> None:
        while True:
            snap = sim.snapshot()
            for ws, role in list(clients.items()):
                msg = dict(snap)
                msg["role"] = role
                await reply(ws, msg)
            await asyncio.sleep(1.0 / BROADCAST_HZ)

    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        tasks.append(asyncio.create_task(sim_task()))
        tasks.append(asyncio.create_task(broadcast_task()))
        yield
        for task in tasks:
            task.cancel()
        for task in tasks:
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.sim = sim

    @app.get("/healthz")
    async def healthz() -> dict:
        return {
            "ok": True,
            "t": sim.t,
            "phase": sim.planner.phase.value,
            "clients": len(clients),
            "protocol": PROTOCOL_VERSION,
        }

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        role = "observer" if controller_socket() is not None else "controller"
        clients[ws] = role
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await reply(ws, {"v": PROTOCOL_VERSION, "type": "err",
                                     "id": None, "error": "not valid JSON"})
                    continue
                if not isinstance(msg, dict) or msg.get("type") != "cmd":
                    await reply(ws, {"v": PROTOCOL_VERSION, "type": "err",
                                     "id": None,
                                     "error": "expected a cmd message"})
                    continue
                if msg.get("v") != PROTOCOL_VERSION:
                    await reply(ws, {"v": PROTOCOL_VERSION, "type": "err",
                                     "id": msg.get("id"),
                                     "error": "unsupported protocol version"})
                    continue
                if clients.get(ws) != "controller":
                    await reply(ws, {"v": PROTOCOL_VERSION, "type": "err",
                                     "id": msg.get("id"),
                                     "error": "read-only connection"})
                    continue
                await pending.put((ws, msg))
        except WebSocketDisconnect:
            pass
        finally:
            was_controller = clients.pop(ws, None) == "controller"
            if was_controller:
                sim.failsafe()
                # Promote the oldest observer so control is never stranded.
                for other in clients:
                    clients[other] = "controller"
                    break

    return app


def serve(cfg: RunConfig | None, scn: Scenario | None, host: str = "127.0.0.1",
          port: int = 8765, time_scale: float = 1.0) -> None:
    import uvicorn

    app = create_app(cfg, scn, time_scale)
    uvicorn.run(app, host=host, port=port, log_level="warning")
