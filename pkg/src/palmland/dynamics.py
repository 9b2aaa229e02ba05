"""Flapping-wing drone plant and the cascaded position/attitude controller.

The plant is a rigid body with thrust along body z, a deterministic
sinusoidal flapping ripple on that thrust, linear drag, and torque control,
integrated semi-implicitly at the physics rate by the selected kernel
backend. The controller runs slower: an outer position PID produces a
desired world acceleration, gravity is fed forward, and the required tilt
is extracted with a small-angle map before an inner attitude PID turns
angle errors into body torques.

An ideal-tracking mode bypasses all of this and teleports the drone to each
setpoint; it exists so planner behaviour can be tested with no controller
error in the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geom import (
    DroneState,
    Vec3,
    quat_from_yaw,
    quat_to_euler,
    wrap_angle,
)
from .planner import Setpoint

GRAVITY = kernels.GRAVITY


class SimulationDiverged(RuntimeError):
    """The physics state stopped being finite."""


@dataclass(frozen=True)
class Wrench:
    """Body-frame thrust along +z and body torques."""

    thrust: float
    torque: tuple[float, float, float]


@dataclass(frozen=True)
class DroneParams:
    mass: float = 0.10  # [kg]
    inertia: tuple[float, float, float] = (1.0e-4, 1.0e-4, 2.0e-4)  # diag [kg m^2]
    max_thrust: float = 0.0  # [N]; 0 means "3x hover weight", filled in below
    max_torque: float = 0.01  # per-axis cap [N m]
    flap_frequency: float = 12.0  # wingbeat [Hz]
    flap_ripple: float = 0.05  # thrust modulation fraction
    drag_coeff: float = 0.05  # linear drag [N s/m]

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be > 0")
        if any(i <= 0.0 for i in self.inertia):
            raise ValueError("inertia diagonal must be > 0")
        if self.max_thrust == 0.0:
            object.__setattr__(self, "max_thrust", 3.0 * self.mass * GRAVITY)
        if self.max_thrust <= 0.0:
            raise ValueError("max_thrust must be > 0")
        if self.max_torque <= 0.0:
            raise ValueError("max_torque must be > 0")
        if not (0.0 <= self.flap_ripple < 1.0):
            raise ValueError("flap_ripple must be in [0, 1)")
        if self.flap_frequency < 0.0 or self.drag_coeff < 0.0:
            raise ValueError("flap_frequency and drag_coeff must be >= 0")


@dataclass(frozen=True)
class ControllerConfig:
    """Gains and rates for the cascaded controller.

    Outer loop: position error times pos_kp [1/s], plus the setpoint's own
    slew, gives a velocity demand; a velocity PI turns the velocity error
    into an acceleration demand. Inner loop: attitude PID from angle error
    [rad] to torque [N m]. Integrator limits clamp the integral term's
    contribution to the output.
    """

    pos_kp: tuple[float, float, float] = (2.0, 2.0, 3.0)
    vel_kp: tuple[float, float, float] = (4.0, 4.0, 5.0)
    vel_ki: tuple[float, float, float] = (2.0, 2.0, 3.0)
    vel_i_limit: float = 1.5  # [m/s^2]
    vel_limit_xy: float = 1.5  # horizontal velocity demand cap [m/s]
    vel_limit_z: float = 1.0  # vertical velocity demand cap [m/s]
    accel_limit_xy: float = 3.0  # horizontal demand cap [m/s^2]
    accel_limit_z: float = 6.0  # vertical demand cap [m/s^2]
    att_kp: tuple[float, float, float] = (0.035, 0.035, 0.012)
    att_ki: tuple[float, float, float] = (0.0, 0.0, 0.0)
    att_kd: tuple[float, float, float] = (0.004, 0.004, 0.003)
    att_i_limit: float = 0.004  # [N m]
    tilt_limit: float = 0.35  # max commanded roll/pitch [rad]
    control_rate: float = 100.0  # [Hz]
    physics_rate: float = 500.0  # [Hz]

    def __post_init__(self):
        if self.control_rate <= 0.0 or self.physics_rate <= 0.0:
            raise ValueError("rates must be > 0")
        steps = self.physics_rate / self.control_rate
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError("physics_rate must be an integer multiple of control_rate")
        if self.vel_i_limit < 0.0 or self.att_i_limit < 0.0:
            raise ValueError("integrator limits must be >= 0")
        if self.vel_limit_xy <= 0.0 or self.vel_limit_z <= 0.0:
            raise ValueError("velocity limits must be > 0")
        if self.accel_limit_xy <= 0.0 or self.accel_limit_z <= 0.0:
            raise ValueError("acceleration limits must be > 0")
        if self.tilt_limit <= 0.0 or self.tilt_limit >= math.pi / 2:
            raise ValueError("tilt_limit must be in (0, pi/2)")

    @property
    def substeps(self) -> int:
        return round(self.physics_rate / self.control_rate)


class Pid3:
    """Independent PID on three axes with clamped integral contribution.

    The derivative is the first difference of the error (zero on the first
    update). The integral term is accumulated as its output contribution
    Ki*sum(e*dt) and clamped to +-i_limit, which stops windup while an
    output stays saturated downstream.
    """

    def __init__(self, kp, ki, kd, i_limit: float):
        self.kp = tuple(float(v) for v in kp)
        self.ki = tuple(float(v) for v in ki)
        self.kd = tuple(float(v) for v in kd)
        self.i_limit = float(i_limit)
        self._i_term = [0.0, 0.0, 0.0]
        self._prev_err: tuple[float, float, float] | None = None

    def reset(self) -> None:
        self._i_term = [0.0, 0.0, 0.0]
        self._prev_err = None

    def update(self, err, dt: float):
        if dt <= 0.0:
            raise ValueError("dt must be > 0")
        out = [0.0, 0.0, 0.0]
        for i in range(3):
            e = float(err[i])
            self._i_term[i] += self.ki[i] * e * dt
            if self._i_term[i] > self.i_limit:
                self._i_term[i] = self.i_limit
            elif self._i_term[i] < -self.i_limit:
                self._i_term[i] = -self.i_limit
            if self._prev_err is None:
                de = 0.0
            else:
                de = (e - self._prev_err[i]) / dt
            out[i] = self.kp[i] * e + self._i_term[i] + self.kd[i] * de
        self._prev_err = (float(err[0]), float(err[1]), float(err[2]))
        return tuple(out)


class Controller:
    """Position-over-velocity-over-attitude cascade producing a wrench.

    The velocity demand is position error scaled by pos_kp plus the goal's
    own slew (feed-forward), so a goal moving at a steady rate is tracked
    with a small bounded lag instead of a proportional-to-speed one.
    """

    MIN_VERTICAL_FORCE_FRACTION = 0.2  # of hover weight, keeps the tilt map sane

    def __init__(self, cfg: ControllerConfig, params: DroneParams):
        self.cfg = cfg
        self.params = params
        self._vel = Pid3(cfg.vel_kp, cfg.vel_ki, (0.0, 0.0, 0.0), cfg.vel_i_limit)
        self._att = Pid3(cfg.att_kp, cfg.att_ki, cfg.att_kd, cfg.att_i_limit)

    def reset(self) -> None:
        self._vel.reset()
        self._att.reset()

    def control_step(self, state: DroneState, setpoint: Setpoint) -> Wrench:
        cfg = self.cfg
        m = self.params.mass
        dt = 1.0 / cfg.control_rate

        goal = setpoint.goal_position
        ff = setpoint.goal_velocity
        vx = cfg.pos_kp[0] * (goal.x - state.position.x) + ff.x
        vy = cfg.pos_kp[1] * (goal.y - state.position.y) + ff.y
        vz = cfg.pos_kp[2] * (goal.z - state.position.z) + ff.z
        hv = cfg.vel_limit_xy
        vx = min(max(vx, -hv), hv)
        vy = min(max(vy, -hv), hv)
        vz = min(max(vz, -cfg.vel_limit_z), cfg.vel_limit_z)

        v_err = (vx - state.velocity.x, vy - state.velocity.y,
                 vz - state.velocity.z)
        ax, ay, az = self._vel.update(v_err, dt)
        # Bounded demands keep the thrust vector from tipping over during
        # aggressive horizontal lunges.
        lim = cfg.accel_limit_xy
        ax = min(max(ax, -lim), lim)
        ay = min(max(ay, -lim), lim)
        az = min(max(az, -cfg.accel_limit_z), cfg.accel_limit_z)

        # Desired world force with gravity feed-forward.
        fx = m * ax
        fy = m * ay
        fz = m * (az + GRAVITY)
        fz = max(fz, self.MIN_VERTICAL_FORCE_FRACTION * m * GRAVITY)

        roll, pitch, yaw = quat_to_euler(state.orientation)
        cp, sp = math.cos(yaw), math.sin(yaw)
        # Small-angle tilt extraction in the yaw-aligned frame.
        pitch_des = math.atan2(fx * cp + fy * sp, fz)
        roll_des = math.atan2(-(fy * cp - fx * sp), fz)
        tilt = cfg.tilt_limit
        pitch_des = min(max(pitch_des, -tilt), tilt)
        roll_des = min(max(roll_des, -tilt), tilt)

        thrust = math.sqrt(fx * fx + fy * fy + fz * fz)
        thrust = min(thrust, self.params.max_thrust)

        att_err = (wrap_angle(roll_des - roll),
                   wrap_angle(pitch_des - pitch),
                   wrap_angle(setpoint.goal_yaw - yaw))
        tx, ty, tz = self._att.update(att_err, dt)
        cap = self.params.max_torque
        torque = (min(max(tx, -cap), cap),
                  min(max(ty, -cap), cap),
                  min(max(tz, -cap), cap))
        return Wrench(thrust=thrust, torque=torque)


def _state_to_array(state: DroneState) -> np.ndarray:
    p, v, q, w = state.position, state.velocity, state.orientation, state.angular_velocity
    return np.array([p.x, p.y, p.z, v.x, v.y, v.z,
                     q[0], q[1], q[2], q[3], w.x, w.y, w.z], dtype=np.float64)


def _array_to_state(a: np.ndarray) -> DroneState:
    return DroneState(
        position=Vec3(a[0], a[1], a[2]),
        velocity=Vec3(a[3], a[4], a[5]),
        orientation=(a[6], a[7], a[8], a[9]),
        angular_velocity=Vec3(a[10], a[11], a[12]),
    )


class FlappingBody:
    """Rigid-body state advanced by the kernel backend.

    Tracks simulated time as step_count * dt (no float accumulation) so the
    flapping ripple phase is reproducible for a given start time.
    """

    def __init__(self, params: DroneParams, initial: DroneState, t0: float = 0.0):
        self.params = params
        self._arr = _state_to_array(initial)
        self._t0 = float(t0)
        self._steps = 0

    def time(self, dt: float) -> float:
        """Simulated time after the steps taken so far at period dt."""
        return self._t0 + self._steps * dt

    @property
    def state(self) -> DroneState:
        return _array_to_state(self._arr)

    def step(self, wrench: Wrench, dt: float, n_steps: int = 1) -> DroneState:
        if dt <= 0.0 or n_steps < 1:
            raise ValueError("need dt > 0 and n_steps >= 1")
        p = self.params
        thrust = min(max(wrench.thrust, 0.0), p.max_thrust)
        cap = p.max_torque
        tx = min(max(wrench.torque[0], -cap), cap)
        ty = min(max(wrench.torque[1], -cap), cap)
        tz = min(max(wrench.torque[2], -cap), cap)
        ok = kernels.physics_run(
            self._arr, 0.0, 0.0, thrust, tx, ty, tz,
            p.mass, p.inertia[0], p.inertia[1], p.inertia[2],
            p.drag_coeff, p.flap_frequency, p.flap_ripple,
            dt, self._t0 + self._steps * dt, n_steps,
        )
        self._steps += n_steps
        if not ok:
            raise SimulationDiverged(
                f"non-finite physics state after {self._steps} steps"
            )
        return self.state


def physics_step(state: DroneState, wrench: Wrench, params: DroneParams,
                 dt: float, t: float = 0.0) -> DroneState:
    """Advance one physics step. Convenience wrapper over the kernel."""
    body = FlappingBody(params, state, t0=t)
    return body.step(wrench, dt, 1)


def ideal_tracking_step(state: DroneState, setpoint: Setpoint, dt: float) -> DroneState:
    """Perfect-tracking plant: jump to the setpoint pose.

    Velocity is set to displacement/dt so traces still carry a meaningful
    speed signal; angular state is zeroed.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    goal = setpoint.goal_position
    vel = (goal - state.position).scaled(1.0 / dt)
    return DroneState(
        position=goal,
        velocity=vel,
        orientation=quat_from_yaw(setpoint.goal_yaw),
        angular_velocity=Vec3(),
    )
