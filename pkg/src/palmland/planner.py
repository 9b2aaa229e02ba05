"""Setpoint generation: mission state machine, four approach domains,
distance-proportional (Weber-law) speed, chest-facing yaw, altitude band.

Per planner tick the drone gets a goal pose. Far out it cruises straight at
the palm; inside the comfort radius the commanded speed shrinks in
proportion to the remaining palm distance, so the perceived closing rate
stays constant; inside the arm-length circle it slides along that circle
toward the palm with zero radial velocity; and if the palm is pulled close
to the chest it holds position and waits. A bent arm (STAY) freezes the
last commanded setpoint until the arm stretches again.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .gesture import Gesture, GestureState
from .geom import (
    DroneState,
    GeometryError,
    UserModel,
    Vec3,
    horizontal_distance,
    wrap_angle,
)


class ConfigError(ValueError):
    """A configuration value violates its documented range."""


class StateMachineError(RuntimeError):
    """An illegal mission-phase transition was requested."""


class MissionPhase(enum.Enum):
    GROUNDED = "GROUNDED"
    TAKEOFF = "TAKEOFF"
    FLIGHT = "FLIGHT"
    LANDING = "LANDING"
    LANDED = "LANDED"


class Domain(enum.Enum):
    """Approach domain, selected from the drone-chest distance."""

    D1_FAR = "D1_FAR"  # outside the comfort radius: straight cruise
    D2_WEBER = "D2_WEBER"  # speed proportional to palm distance
    D3_ARC = "D3_ARC"  # slide along the arm-length circle
    D4_HOLD = "D4_HOLD"  # palm too close to chest: wait


@dataclass(frozen=True)
class PlannerConfig:
    comfort_radius: float = 1.25  # outside this, plain cruise [m]
    safety_radius: float = 0.30  # never command a goal inside this chest disk [m]
    weber_gain: float = 0.2  # fraction of palm distance covered per tick
    weber_gain_boost: float = 0.5  # gain once the palm is nearly reached
    boost_radius: float = 0.3  # palm distance below which the boost applies [m]
    tick_dt: float = 0.1  # planner period [s]
    cruise_speed: float = 0.8  # D1 straight-approach speed [m/s]
    max_speed: float = 1.0  # hard cap on commanded speed [m/s]
    # Commit gate: the boosted speed law still commands ~0.3 m/s at 0.06 m,
    # so the speed bar sits just under that; the landing leg then decelerates.
    land_commit_distance: float = 0.06  # palm distance to commit landing [m]
    land_commit_speed: float = 0.25  # max relative speed to commit [m/s]
    takeoff_altitude: float = 1.2  # [m]
    switch_ramp_time: float = 0.0  # optional speed ramp after gesture switches [s], 0 = off

    MAX_WEBER_GAIN = 0.33  # keeps speed under max_speed across the comfort range

    def __post_init__(self):
        if not (0.0 < self.safety_radius < self.comfort_radius):
            raise ConfigError("need 0 < safety_radius < comfort_radius")
        if not (0.0 < self.weber_gain <= self.MAX_WEBER_GAIN):
            raise ConfigError(f"weber_gain must be in (0, {self.MAX_WEBER_GAIN}]")
        if self.weber_gain_boost <= 0.0:
            raise ConfigError("weber_gain_boost must be > 0")
        if self.boost_radius < 0.0:
            raise ConfigError("boost_radius must be >= 0")
        if self.tick_dt <= 0.0:
            raise ConfigError("tick_dt must be > 0")
        if not (0.0 < self.cruise_speed <= self.max_speed):
            raise ConfigError("need 0 < cruise_speed <= max_speed")
        if self.land_commit_distance < 0.0 or self.land_commit_speed < 0.0:
            raise ConfigError("landing commit thresholds must be >= 0")
        if self.takeoff_altitude <= 0.0:
            raise ConfigError("takeoff_altitude must be > 0")
        if self.switch_ramp_time < 0.0:
            raise ConfigError("switch_ramp_time must be >= 0")


@dataclass(frozen=True)
class Setpoint:
    """Goal pose commanded to the drone for one planner tick.

    goal_velocity is the slew rate of the goal sequence itself, used as a
    tracking feed-forward; it is zero for held setpoints.
    """

    goal_position: Vec3
    goal_yaw: float
    commanded_speed: float
    source_domain: Domain
    phase: MissionPhase
    goal_velocity: Vec3 = Vec3()


@dataclass(frozen=True)
class PlannerStatus:
    phase: MissionPhase
    gesture: Gesture
    domain: Domain
    d_palm: float
    r_chest: float


@dataclass(frozen=True)
class WorldState:
    """Snapshot exchanged between modules each tick."""

    t: float
    user: UserModel
    drone: DroneState
    planner: PlannerStatus | None = None
    setpoint: Setpoint | None = None


# ---------------------------------------------------------------------------
# Pure planning rules
# ---------------------------------------------------------------------------


def classify_domain(r_chest: float, palm_chest: float, user: UserModel,
                    cfg: PlannerConfig) -> Domain:
    """Pick the approach domain from chest distances.

    A palm held within the safety radius forces D4 regardless of where the
    drone is. Otherwise the drone-chest distance r selects D1 (r beyond the
    comfort radius), D2 (down to arm length, inclusive at the top), or D3.
    A drone already inside the safety radius also gets D3; the arc rule then
    pushes it radially back out to the arm circle.
    """
    arm = user.arm_length
    if not (cfg.safety_radius < arm < cfg.comfort_radius):
        raise ConfigError(
            f"arm_length {arm} must lie strictly between safety_radius "
            f"{cfg.safety_radius} and comfort_radius {cfg.comfort_radius}"
        )
    if r_chest < 0.0 or palm_chest < 0.0:
        raise ValueError("distances must be >= 0")
    if palm_chest <= cfg.safety_radius:
        return Domain.D4_HOLD
    if r_chest > cfg.comfort_radius:
        return Domain.D1_FAR
    if r_chest > arm:
        return Domain.D2_WEBER
    return Domain.D3_ARC


def weber_speed(d_palm: float, gain: float, cfg: PlannerConfig) -> float:
    """Commanded speed gain*d/dt, capped at max_speed. Monotone in d_palm."""
    if d_palm < 0.0:
        raise ValueError("d_palm must be >= 0")
    if gain <= 0.0:
        raise ValueError("gain must be > 0")
    return min(gain * d_palm / cfg.tick_dt, cfg.max_speed)


def effective_weber_gain(d_palm: float, cfg: PlannerConfig) -> float:
    """Gain schedule: boosted once the palm is strictly closer than boost_radius."""
    if d_palm < 0.0:
        raise ValueError("d_palm must be >= 0")
    return cfg.weber_gain_boost if d_palm < cfg.boost_radius else cfg.weber_gain


def weber_goal(current: Vec3, target: Vec3, gain: float, cfg: PlannerConfig) -> Vec3:
    """Next goal: step gain*d toward the target in the xy plane.

    The step is capped at max_speed*tick_dt. z is passed through unchanged
    (the altitude channel is separate). current == target is a fixed point.
    """
    d = horizontal_distance(current, target)
    if d == 0.0:
        return current
    step = min(gain * d, cfg.max_speed * cfg.tick_dt)
    ux = (target.x - current.x) / d
    uy = (target.y - current.y) / d
    return Vec3(current.x + ux * step, current.y + uy * step, current.z)


def arc_goal(drone: Vec3, chest: Vec3, palm: Vec3, arm_length: float,
             gain: float, cfg: PlannerConfig) -> Vec3:
    """Next goal on the arm-length circle around the chest.

    The drone is first projected radially onto the circle (spending at most
    the per-tick motion budget), then advanced along the circle toward the
    palm's polar angle by min(gain * remaining_arc, leftover budget). Radial
    velocity toward the chest is zero by construction once on the circle.
    z is passed through unchanged.
    """
    rx = drone.x - chest.x
    ry = drone.y - chest.y
    rho = math.hypot(rx, ry)
    if rho < 1e-9:
        raise GeometryError("drone is directly above the chest; arc undefined")
    theta_d = math.atan2(ry, rx)
    theta_p = math.atan2(palm.y - chest.y, palm.x - chest.x)

    budget = cfg.max_speed * cfg.tick_dt
    radial_gap = rho - arm_length
    if abs(radial_gap) <= budget:
        new_rho = arm_length
        remaining = budget - abs(radial_gap)
    else:
        new_rho = rho - math.copysign(budget, radial_gap)
        remaining = 0.0

    dtheta = wrap_angle(theta_p - theta_d)
    arc_left = arm_length * abs(dtheta)
    tangential = min(gain * arc_left, remaining)
    if arc_left > 0.0 and tangential > 0.0:
        new_theta = theta_d + math.copysign(tangential / arm_length, dtheta)
    else:
        new_theta = theta_d
    return Vec3(chest.x + new_rho * math.cos(new_theta),
                chest.y + new_rho * math.sin(new_theta),
                drone.z)


def goal_yaw_toward_chest(drone: Vec3, chest: Vec3) -> float:
    """Heading that points the drone's front at the user's chest."""
    dx = chest.x - drone.x
    dy = chest.y - drone.y
    if abs(dx) < 1e-9 and abs(dy) < 1e-9:
        raise GeometryError("drone and chest coincide in xy; yaw undefined")
    return math.atan2(dy, dx)


def target_altitude(palm_z: float, user: UserModel) -> float:
    """Palm height clamped into the elbow-to-eye band."""
    return min(max(palm_z, user.elbow_height), user.eye_height)


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def _enforce_safety_disk(cur: Vec3, goal: Vec3, chest: Vec3, radius: float) -> Vec3:
    """Stop the commanded xy motion at the chest safety disk.

    The allowed floor is min(radius, current chest distance), so a drone that
    somehow starts inside the disk is never commanded further in. If the goal
    falls below the floor, it is pulled back to the first intersection of the
    motion segment with the floor circle (never lengthening the step).
    """
    floor = min(radius, horizontal_distance(cur, chest))
    if horizontal_distance(goal, chest) >= floor:
        return goal
    dx = goal.x - cur.x
    dy = goal.y - cur.y
    ex = cur.x - chest.x
    ey = cur.y - chest.y
    a = dx * dx + dy * dy
    b = 2.0 * (dx * ex + dy * ey)
    c = ex * ex + ey * ey - floor * floor
    disc = b * b - 4.0 * a * c
    if a == 0.0 or disc < 0.0:
        return Vec3(cur.x, cur.y, goal.z)
    s = (-b - math.sqrt(disc)) / (2.0 * a)
    if s < 0.0:
        s = (-b + math.sqrt(disc)) / (2.0 * a)
    s = _clamp(s, 0.0, 1.0)
    return Vec3(cur.x + s * dx, cur.y + s * dy, goal.z)


# ---------------------------------------------------------------------------
# Stateful planner
# ---------------------------------------------------------------------------


_LEGAL_NEXT = {
    MissionPhase.GROUNDED: {MissionPhase.TAKEOFF},
    MissionPhase.TAKEOFF: {MissionPhase.FLIGHT},
    MissionPhase.FLIGHT: {MissionPhase.LANDING},
    MissionPhase.LANDING: {MissionPhase.LANDED},
    MissionPhase.LANDED: set(),
}

TAKEOFF_CAPTURE_TOL = 0.05  # |z - takeoff_altitude| to call takeoff done [m]
TOUCHDOWN_DROP = 0.05  # landing descends this far below the palm point [m]
TOUCHDOWN_TOL = 0.01  # z tolerance to call the drone landed [m]


class Planner:
    """Owns the mission phase and produces one Setpoint per tick.

    Not safe for concurrent stepping; run one instance per simulated drone.
    """

    def __init__(self, cfg: PlannerConfig | None = None):
        self.cfg = cfg or PlannerConfig()
        self.phase = MissionPhase.GROUNDED
        self.last_status: PlannerStatus | None = None
        self._stay_setpoint: Setpoint | None = None
        self._last_setpoint: Setpoint | None = None
        self._takeoff_origin: tuple[float, float] | None = None
        self._prev_palm: Vec3 | None = None

    def reset(self) -> None:
        """Back to GROUNDED (legal from any phase)."""
        self.phase = MissionPhase.GROUNDED
        self.last_status = None
        self._stay_setpoint = None
        self._last_setpoint = None
        self._takeoff_origin = None
        self._prev_palm = None

    def command_takeoff(self) -> None:
        if self.phase is not MissionPhase.GROUNDED:
            raise StateMachineError(f"takeoff not allowed from {self.phase.value}")
        self._transition(MissionPhase.TAKEOFF)

    def _transition(self, nxt: MissionPhase) -> None:
        if nxt not in _LEGAL_NEXT[self.phase]:
            raise StateMachineError(f"illegal transition {self.phase.value} -> {nxt.value}")
        self.phase = nxt

    def step(self, world: WorldState, gesture: GestureState) -> Setpoint:
        """Advance one planner tick and return the commanded setpoint.

        Must be called at the fixed cadence cfg.tick_dt. Deterministic in
        (world, gesture, cfg, internal phase state).
        """
        cfg = self.cfg
        user = world.user
        drone = world.drone
        chest = user.chest.position
        palm = user.palm.position

        d_palm = horizontal_distance(drone.position, palm)
        r_chest = horizontal_distance(drone.position, chest)
        palm_chest = horizontal_distance(palm, chest)
        domain = classify_domain(r_chest, palm_chest, user, cfg)

        if self._prev_palm is None:
            palm_vel = Vec3()
        else:
            palm_vel = (palm - self._prev_palm).scaled(1.0 / cfg.tick_dt)
        self._prev_palm = palm

        self._advance_phase(world, gesture, d_palm, palm_vel)

        if self.phase is MissionPhase.GROUNDED:
            sp = self._hold_here(drone, domain, MissionPhase.GROUNDED)
        elif self.phase is MissionPhase.TAKEOFF:
            sp = self._takeoff_setpoint(drone, chest, domain)
        elif self.phase is MissionPhase.FLIGHT:
            if gesture.current is Gesture.STAY:
                if self._stay_setpoint is None:
                    self._stay_setpoint = self._capture_hold(user, drone, domain)
                sp = self._stay_setpoint
            else:
                self._stay_setpoint = None
                sp = self._approach_setpoint(world, gesture, domain, d_palm)
        elif self.phase is MissionPhase.LANDING:
            sp = self._landing_setpoint(drone, chest, palm, domain)
        else:  # LANDED
            sp = self._hold_here(drone, domain, MissionPhase.LANDED)

        prev = self._last_setpoint
        if (sp is not self._stay_setpoint and prev is not None
                and prev.phase is sp.phase):
            slew = (sp.goal_position - prev.goal_position).scaled(1.0 / cfg.tick_dt)
            sp = replace(sp, goal_velocity=slew)

        self._last_setpoint = sp
        self.last_status = PlannerStatus(
            phase=self.phase, gesture=gesture.current, domain=domain,
            d_palm=d_palm, r_chest=r_chest,
        )
        return sp

    # -- phase logic --------------------------------------------------------

    def _advance_phase(self, world: WorldState, gesture: GestureState,
                       d_palm: float, palm_vel: Vec3) -> None:
        drone = world.drone
        palm = world.user.palm.position
        if self.phase is MissionPhase.TAKEOFF:
            if abs(drone.position.z - self.cfg.takeoff_altitude) <= TAKEOFF_CAPTURE_TOL:
                self._transition(MissionPhase.FLIGHT)
        elif self.phase is MissionPhase.FLIGHT:
            if gesture.current is Gesture.APPROACH and d_palm < self.cfg.land_commit_distance:
                rel_speed = (drone.velocity - palm_vel).norm()
                if rel_speed < self.cfg.land_commit_speed:
                    self._transition(MissionPhase.LANDING)
        elif self.phase is MissionPhase.LANDING:
            touchdown_z = palm.z - TOUCHDOWN_DROP
            if abs(drone.position.z - touchdown_z) <= TOUCHDOWN_TOL and d_palm <= 0.08:
                self._transition(MissionPhase.LANDED)

    # -- setpoint builders ---------------------------------------------------

    def _hold_here(self, drone: DroneState, domain: Domain, phase: MissionPhase) -> Setpoint:
        return Setpoint(
            goal_position=drone.position, goal_yaw=drone.yaw(),
            commanded_speed=0.0, source_domain=domain, phase=phase,
        )

    def _yaw_or_current(self, drone: DroneState, chest: Vec3) -> float:
        try:
            return goal_yaw_toward_chest(drone.position, chest)
        except GeometryError:
            return drone.yaw()

    def _takeoff_setpoint(self, drone: DroneState, chest: Vec3, domain: Domain) -> Setpoint:
        cfg = self.cfg
        if self._takeoff_origin is None:
            self._takeoff_origin = (drone.position.x, drone.position.y)
        budget = cfg.max_speed * cfg.tick_dt
        dz = _clamp(cfg.takeoff_altitude - drone.position.z, -budget, budget)
        goal = Vec3(self._takeoff_origin[0], self._takeoff_origin[1], drone.position.z + dz)
        return Setpoint(
            goal_position=goal,
            goal_yaw=self._yaw_or_current(drone, chest),
            commanded_speed=abs(dz) / cfg.tick_dt,
            source_domain=domain,
            phase=MissionPhase.TAKEOFF,
        )

    def _capture_hold(self, user: UserModel, drone: DroneState, domain: Domain) -> Setpoint:
        """Setpoint to freeze while the gesture says STAY.

        A held goal must not keep its slew feed-forward, or the hold would
        creep in the old direction of travel.
        """
        last = self._last_setpoint
        if last is not None and last.phase is MissionPhase.FLIGHT:
            return replace(last, goal_velocity=Vec3())
        budget = self.cfg.max_speed * self.cfg.tick_dt
        z = drone.position.z
        goal_z = z + _clamp(_clamp(z, user.elbow_height, user.eye_height) - z, -budget, budget)
        return Setpoint(
            goal_position=drone.position.with_z(goal_z),
            goal_yaw=self._yaw_or_current(drone, user.chest.position),
            commanded_speed=0.0,
            source_domain=domain,
            phase=MissionPhase.FLIGHT,
        )

    def _approach_setpoint(self, world: WorldState, gesture: GestureState,
                           domain: Domain, d_palm: float) -> Setpoint:
        cfg = self.cfg
        user = world.user
        drone = world.drone
        cur = drone.position
        chest = user.chest.position
        palm = user.palm.position
        budget = cfg.max_speed * cfg.tick_dt
        gain = effective_weber_gain(d_palm, cfg)

        if domain is Domain.D1_FAR:
            if d_palm == 0.0:
                goal = cur
            else:
                step = min(cfg.cruise_speed * cfg.tick_dt, d_palm)
                goal = Vec3(cur.x + (palm.x - cur.x) / d_palm * step,
                            cur.y + (palm.y - cur.y) / d_palm * step,
                            cur.z)
        elif domain is Domain.D2_WEBER:
            goal = weber_goal(cur, palm, gain, cfg)
        elif domain is Domain.D3_ARC:
            goal = arc_goal(cur, chest, palm, user.arm_length, gain, cfg)
        else:  # D4_HOLD
            goal = cur

        if cfg.switch_ramp_time > 0.0:
            ramp = _clamp((world.t - gesture.last_transition_t) / cfg.switch_ramp_time, 0.0, 1.0)
            goal = Vec3(cur.x + (goal.x - cur.x) * ramp,
                        cur.y + (goal.y - cur.y) * ramp,
                        goal.z)

        goal = _enforce_safety_disk(cur, goal, chest, cfg.safety_radius)

        h_step = horizontal_distance(goal, cur)
        v_budget = math.sqrt(max(0.0, budget * budget - h_step * h_step))
        target_z = target_altitude(palm.z, user)
        goal_z = cur.z + _clamp(target_z - cur.z, -v_budget, v_budget)

        return Setpoint(
            goal_position=goal.with_z(goal_z),
            goal_yaw=goal_yaw_toward_chest(cur, chest),
            # Recomputing the distance can pick up one ulp over the cap.
            commanded_speed=min(h_step / cfg.tick_dt, cfg.max_speed),
            source_domain=domain,
            phase=MissionPhase.FLIGHT,
        )

    def _landing_setpoint(self, drone: DroneState, chest: Vec3, palm: Vec3,
                          domain: Domain) -> Setpoint:
        cfg = self.cfg
        cur = drone.position
        target = Vec3(palm.x, palm.y, palm.z - TOUCHDOWN_DROP)
        delta = target - cur
        dist = delta.norm()
        budget = cfg.max_speed * cfg.tick_dt
        scale = 1.0 if dist <= budget else budget / dist
        goal = cur + delta.scaled(scale)
        return Setpoint(
            goal_position=goal,
            goal_yaw=self._yaw_or_current(drone, chest),
            commanded_speed=dist * scale / cfg.tick_dt,
            source_domain=domain,
            phase=MissionPhase.LANDING,
        )
