"""Scripted user behaviour and recorded user-pose replay.

A scenario is a small JSON file describing where the user stands, where the
drone starts, and a timeline of events: "stretch" (raise the palm to full
arm reach, inviting approach), "bend" (pull the palm back to the chest,
requesting a hold) and "walk" (move the chest toward a waypoint at a given
speed). Arm events blend the palm between poses over a fixed ramp so the
gesture input looks like a human arm, not a step function.

A user trace is a CSV of timestamped chest and palm poses, typically
exported from a motion-capture session, replayed with piecewise-linear
position interpolation and zero-order-hold orientations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .geom import Pose, UserModel, Vec3, quat_from_yaw, quat_norm

ARM_RAMP_S = 0.5  # stretch/bend blend duration
BEND_PALM_DROP = 0.10  # bent palm sits this far below the chest [m]

USER_TRACE_COLUMNS = (
    "t",
    "chest_x", "chest_y", "chest_z", "chest_qw", "chest_qx", "chest_qy", "chest_qz",
    "palm_x", "palm_y", "palm_z", "palm_qw", "palm_qx", "palm_qy", "palm_qz",
)


class ScenarioError(ValueError):
    """A scenario file is malformed or kinematically impossible."""


class TraceFormatError(ValueError):
    """A user-trace CSV is malformed; the message cites the line."""


@dataclass(frozen=True)
class ArmEvent:
    t: float
    stretched: bool  # True: palm out at arm length; False: palm near chest


@dataclass(frozen=True)
class WalkEvent:
    t: float
    to: tuple[float, float]
    speed: float


@dataclass(frozen=True)
class ScenarioUser:
    chest_xy: tuple[float, float]
    chest_z: float
    chest_yaw: float  # [rad]; fixed, the chest does not turn while walking
    arm_length: float
    elbow_height: float
    eye_height: float
    palm_raise_z: float  # stretched palm height [m]
    bend_offset: float  # bent palm forward offset from the chest [m]


@dataclass(frozen=True)
class Scenario:
    name: str
    duration_s: float
    seed: int
    user: ScenarioUser
    drone_start_xy: tuple[float, float]
    drone_start_z: float
    arm_events: tuple[ArmEvent, ...]
    walk_events: tuple[WalkEvent, ...]


def _need(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioError(f"{where}: missing required field '{key}'")
    return obj[key]


def _num(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}: missing required field '{key}'")
        return float(default)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}: field '{key}' must be a number")
    return float(v)


def _xy(obj: dict, key: str, where: str) -> tuple[float, float]:
    v = _need(obj, key, where)
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)):
        raise ScenarioError(f"{where}: field '{key}' must be [x, y]")
    return (float(v[0]), float(v[1]))


def scenario_from_dict(data: dict, name_hint: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError(f"{name_hint}: top level must be an object")
    name = data.get("name", name_hint)
    duration = _num(data, "duration_s", name)
    if duration <= 0.0:
        raise ScenarioError(f"{name}: duration_s must be > 0")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"{name}: seed must be an integer")

    udata = _need(data, "user", name)
    if not isinstance(udata, dict):
        raise ScenarioError(f"{name}: 'user' must be an object")
    uw = f"{name}.user"
    user = ScenarioUser(
        chest_xy=_xy(udata, "chest_xy", uw),
        chest_z=_num(udata, "chest_z", uw, 1.25),
        chest_yaw=math.radians(_num(udata, "chest_yaw_deg", uw, 0.0)),
        arm_length=_num(udata, "arm_length_m", uw, 0.65),
        elbow_height=_num(udata, "elbow_height_m", uw, 1.0),
        eye_height=_num(udata, "eye_height_m", uw, 1.6),
        palm_raise_z=_num(udata, "palm_raise_z", uw, 1.1),
        bend_offset=_num(udata, "bend_offset_m", uw, 0.15),
    )
    if user.arm_length <= 0.0:
        raise ScenarioError(f"{uw}: arm_length_m must be > 0")
    if not (0.0 < user.bend_offset < user.arm_length):
        raise ScenarioError(f"{uw}: bend_offset_m must be in (0, arm_length_m)")

    arm_events: list[ArmEvent] = []
    walk_events: list[WalkEvent] = []
    events = data.get("events", [])
    if not isinstance(events, list):
        raise ScenarioError(f"{name}: 'events' must be a list")
    for i, ev in enumerate(events):
        where = f"{name}.events[{i}]"
        if not isinstance(ev, dict):
            raise ScenarioError(f"{where}: must be an object")
        t = _num(ev, "t", where)
        if t < 0.0:
            raise ScenarioError(f"{where}: t must be >= 0")
        kind = _need(ev, "type", where)
        if kind == "stretch":
            arm_events.append(ArmEvent(t, True))
        elif kind == "bend":
            arm_events.append(ArmEvent(t, False))
        elif kind == "walk":
            speed = _num(ev, "speed", where)
            if speed <= 0.0:
                raise ScenarioError(f"{where}: walk speed must be > 0")
            walk_events.append(WalkEvent(t, _xy(ev, "to", where), speed))
        else:
            raise ScenarioError(f"{where}: unknown event type '{kind}'")

    arm_events.sort(key=lambda e: e.t)
    walk_events.sort(key=lambda e: e.t)
    for a, b in zip(arm_events, arm_events[1:]):
        if b.t - a.t < ARM_RAMP_S:
            raise ScenarioError(f"{name}: arm events at t={a.t} and t={b.t} "
                                f"overlap the {ARM_RAMP_S}s blend")

    return Scenario(
        name=str(name),
        duration_s=duration,
        seed=seed,
        user=user,
        drone_start_xy=_xy(data, "drone_start_xy", name),
        drone_start_z=_num(data, "drone_start_z", name, 0.0),
        arm_events=tuple(arm_events),
        walk_events=tuple(walk_events),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(data, name_hint=path.stem)


def builtin_scenario_names() -> list[str]:
    """Names of the scenarios shipped inside the package."""
    pkg = resources.files("palmland").joinpath("data/scenarios")
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".json"))


def load_builtin_scenario(name: str) -> Scenario:
    pkg = resources.files("palmland").joinpath(f"data/scenarios/{name}.json")
    if not pkg.is_file():
        known = ", ".join(builtin_scenario_names())
        raise ScenarioError(f"unknown scenario '{name}' (available: {known})")
    return scenario_from_dict(json.loads(pkg.read_text()), name_hint=name)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _chest_xy_at(scn: Scenario, t: float) -> tuple[float, float]:
    x, y = scn.user.chest_xy
    t_free = 0.0  # time at which the chest finished its previous walk
    for ev in scn.walk_events:
        start = max(ev.t, t_free)
        dx = ev.to[0] - x
        dy = ev.to[1] - y
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            t_free = start
            continue
        arrive = start + dist / ev.speed
        if t <= start:
            break
        if t >= arrive:
            x, y = ev.to
            t_free = arrive
            continue
        frac = (t - start) * ev.speed / dist
        return (x + dx * frac, y + dy * frac)
    return (x, y)


def _palm_local_at(scn: Scenario, t: float) -> tuple[float, float]:
    """(forward offset, height) of the palm in the chest frame at time t."""
    u = scn.user

    def pose(stretched: bool) -> tuple[float, float]:
        if stretched:
            return (u.arm_length, u.palm_raise_z)
        return (u.bend_offset, u.chest_z - BEND_PALM_DROP)

    cur = pose(False)  # arms start bent: the session opens in STAY
    for ev in scn.arm_events:
        if t < ev.t:
            break
        target = pose(ev.stretched)
        frac = min((t - ev.t) / ARM_RAMP_S, 1.0)
        cur = (cur[0] + (target[0] - cur[0]) * frac,
               cur[1] + (target[1] - cur[1]) * frac)
        if frac < 1.0:
            break
    return cur


def sample_user(scn: Scenario, t: float) -> UserModel:
    """User pose at time t. Pure and deterministic in (scenario, t)."""
    u = scn.user
    cx, cy = _chest_xy_at(scn, t)
    fwd, palm_z = _palm_local_at(scn, t)
    q = quat_from_yaw(u.chest_yaw)
    palm = Vec3(cx + fwd * math.cos(u.chest_yaw),
                cy + fwd * math.sin(u.chest_yaw),
                palm_z)
    return UserModel(
        chest=Pose(Vec3(cx, cy, u.chest_z), q),
        palm=Pose(palm, q),
        arm_length=u.arm_length,
        elbow_height=u.elbow_height,
        eye_height=u.eye_height,
    )


# ---------------------------------------------------------------------------
# Recorded user traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UserTrace:
    """Timestamped chest and palm poses from a recording."""

    t: tuple[float, ...]
    chest_pos: tuple[Vec3, ...]
    chest_quat: tuple[tuple[float, float, float, float], ...]
    palm_pos: tuple[Vec3, ...]
    palm_quat: tuple[tuple[float, float, float, float], ...]

    @property
    def duration(self) -> float:
        return self.t[-1]

    def sample(self, t: float, arm_length: float = 0.65,
               elbow_height: float = 1.0, eye_height: float = 1.6) -> UserModel:
        """Pose at time t: linear positions, held orientations.

        Before the first sample the first row holds; after the last, the
        last row holds.
        """
        ts = self.t
        if t <= ts[0]:
            i, frac = 0, 0.0
        elif t >= ts[-1]:
            i, frac = len(ts) - 2, 1.0
        else:
            lo, hi = 0, len(ts) - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if ts[mid] <= t:
                    lo = mid
                else:
                    hi = mid
            i = lo
            frac = (t - ts[i]) / (ts[i + 1] - ts[i])
        if len(ts) == 1:
            i, frac = 0, 0.0
            chest = self.chest_pos[0]
            palm = self.palm_pos[0]
        else:
            c0, c1 = self.chest_pos[i], self.chest_pos[i + 1]
            p0, p1 = self.palm_pos[i], self.palm_pos[i + 1]
            chest = c0 + (c1 - c0).scaled(frac)
            palm = p0 + (p1 - p0).scaled(frac)
        qi = i if frac < 1.0 else i + (1 if len(ts) > 1 else 0)
        return UserModel(
            chest=Pose(chest, self.chest_quat[qi]),
            palm=Pose(palm, self.palm_quat[qi]),
            arm_length=arm_length,
            elbow_height=elbow_height,
            eye_height=eye_height,
        )


def load_user_trace(path: str | Path) -> UserTrace:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty file")
    header = tuple(col.strip() for col in lines[0].split(","))
    if header != USER_TRACE_COLUMNS:
        raise TraceFormatError(
            f"{path}:1: bad header; expected '{','.join(USER_TRACE_COLUMNS)}'"
        )
    ts: list[float] = []
    chest_pos: list[Vec3] = []
    chest_quat: list[tuple[float, float, float, float]] = []
    palm_pos: list[Vec3] = []
    palm_quat: list[tuple[float, float, float, float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(USER_TRACE_COLUMNS):
            raise TraceFormatError(
                f"{path}:{lineno}: expected {len(USER_TRACE_COLUMNS)} fields, "
                f"got {len(parts)}"
            )
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise TraceFormatError(f"{path}:{lineno}: non-finite value")
        t = vals[0]
        if ts and t <= ts[-1]:
            raise TraceFormatError(f"{path}:{lineno}: t must be strictly increasing")
        cq = (vals[4], vals[5], vals[6], vals[7])
        pq = (vals[11], vals[12], vals[13], vals[14])
        for label, q in (("chest", cq), ("palm", pq)):
            if abs(quat_norm(q) - 1.0) > 1e-6:
                raise TraceFormatError(
                    f"{path}:{lineno}: {label} quaternion is not unit norm"
                )
        ts.append(t)
        chest_pos.append(Vec3(vals[1], vals[2], vals[3]))
        chest_quat.append(cq)
        palm_pos.append(Vec3(vals[8], vals[9], vals[10]))
        palm_quat.append(pq)
    if not ts:
        raise TraceFormatError(f"{path}: no data rows")
    return UserTrace(
        t=tuple(ts),
        chest_pos=tuple(chest_pos),
        chest_quat=tuple(chest_quat),
        palm_pos=tuple(palm_pos),
        palm_quat=tuple(palm_quat),
    )
