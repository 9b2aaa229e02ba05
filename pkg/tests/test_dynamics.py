"""Plant model and cascaded controller."""

import math

import numpy as np
import pytest

from helpers import make_drone
from palmland.dynamics import (
    Controller,
    ControllerConfig,
    DroneParams,
    FlappingBody,
    Pid3,
    SimulationDiverged,
    Wrench,
    ideal_tracking_step,
    physics_step,
)
from palmland.geom import DroneState, Vec3, quat_norm
from palmland.kernels import GRAVITY
from palmland.planner import Domain, MissionPhase, Setpoint

# mass 0.25 makes thrust/mass arithmetic exact in floats, so the hover
# equilibrium below is bit-stationary rather than merely close.
EXACT_PARAMS = DroneParams(mass=0.25, flap_ripple=0.0, drag_coeff=0.05)


def hover_setpoint(pos, yaw=0.0):
    return Setpoint(goal_position=pos, goal_yaw=yaw, commanded_speed=0.0,
                    source_domain=Domain.D1_FAR, phase=MissionPhase.FLIGHT)


class TestParams:
    def test_default_thrust_is_three_hover_weights(self):
        p = DroneParams()
        assert p.max_thrust == pytest.approx(3.0 * p.mass * GRAVITY)

    @pytest.mark.parametrize("kwargs", [
        {"mass": 0.0},
        {"inertia": (1e-4, 0.0, 2e-4)},
        {"max_thrust": -1.0},
        {"max_torque": 0.0},
        {"flap_ripple": 1.0},
        {"flap_ripple": -0.1},
        {"drag_coeff": -0.01},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            DroneParams(**kwargs)

    @pytest.mark.parametrize("kwargs", [
        {"control_rate": 0.0},
        {"physics_rate": 333.0},  # not an integer multiple of 100
        {"tilt_limit": 0.0},
        {"tilt_limit": math.pi / 2},
        {"vel_i_limit": -1.0},
        {"vel_limit_xy": 0.0},
        {"accel_limit_z": 0.0},
    ])
    def test_controller_config_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            ControllerConfig(**kwargs)

    def test_substeps(self):
        assert ControllerConfig().substeps == 5


class TestPid3:
    def test_proportional(self):
        pid = Pid3((2.0, 2.0, 2.0), (0.0,) * 3, (0.0,) * 3, 1.0)
        assert pid.update((1.0, -2.0, 0.5), 0.01) == (2.0, -4.0, 1.0)

    def test_integral_rectangle(self):
        pid = Pid3((0.0,) * 3, (1.0, 1.0, 1.0), (0.0,) * 3, 10.0)
        assert pid.update((1.0, 1.0, 1.0), 0.5) == (0.5, 0.5, 0.5)
        assert pid.update((1.0, 1.0, 1.0), 0.5) == (1.0, 1.0, 1.0)

    def test_integral_windup_clamp(self):
        pid = Pid3((0.0,) * 3, (1.0, 1.0, 1.0), (0.0,) * 3, 0.3)
        for _ in range(5):
            out = pid.update((1.0, -1.0, 0.0), 1.0)
        assert out == (0.3, -0.3, 0.0)

    def test_derivative_first_difference(self):
        pid = Pid3((0.0,) * 3, (0.0,) * 3, (1.0, 1.0, 1.0), 1.0)
        assert pid.update((5.0, 0.0, 0.0), 0.5) == (0.0, 0.0, 0.0)
        assert pid.update((7.0, 0.0, 0.0), 0.5) == (4.0, 0.0, 0.0)

    def test_reset(self):
        pid = Pid3((0.0,) * 3, (1.0,) * 3, (1.0,) * 3, 10.0)
        pid.update((1.0, 1.0, 1.0), 1.0)
        pid.reset()
        assert pid.update((0.0, 0.0, 0.0), 1.0) == (0.0, 0.0, 0.0)

    def test_rejects_zero_dt(self):
        pid = Pid3((1.0,) * 3, (0.0,) * 3, (0.0,) * 3, 1.0)
        with pytest.raises(ValueError):
            pid.update((1.0, 1.0, 1.0), 0.0)


class TestController:
    def test_hover_equilibrium_force(self):
        params = DroneParams()
        ctl = Controller(ControllerConfig(), params)
        pos = Vec3(1.0, 2.0, 1.2)
        state = make_drone(pos=pos.as_tuple())
        w = ctl.control_step(state, hover_setpoint(pos))
        assert abs(w.thrust - params.mass * GRAVITY) < 1e-9
        assert w.torque == (0.0, 0.0, 0.0)

    def test_goal_above_raises_thrust(self):
        params = DroneParams()
        ctl = Controller(ControllerConfig(), params)
        state = make_drone(pos=(0.0, 0.0, 1.0))
        w = ctl.control_step(state, hover_setpoint(Vec3(0.0, 0.0, 1.5)))
        assert w.thrust > params.mass * GRAVITY

    def test_yaw_error_turns_positive_z_torque(self):
        ctl = Controller(ControllerConfig(), DroneParams())
        state = make_drone(pos=(0.0, 0.0, 1.2))
        w = ctl.control_step(state, hover_setpoint(Vec3(0.0, 0.0, 1.2),
                                                   yaw=0.5))
        assert w.torque[2] > 0.0

    def test_forward_goal_pitches_nose_down_torque(self):
        ctl = Controller(ControllerConfig(), DroneParams())
        state = make_drone(pos=(0.0, 0.0, 1.2))
        w = ctl.control_step(state, hover_setpoint(Vec3(1.0, 0.0, 1.2)))
        assert w.torque[1] > 0.0  # pitch toward +x
        assert w.thrust > DroneParams().mass * GRAVITY

    def test_feed_forward_engages_without_position_error(self):
        ctl = Controller(ControllerConfig(), DroneParams())
        pos = Vec3(0.0, 0.0, 1.2)
        state = make_drone(pos=pos.as_tuple())
        sp = Setpoint(goal_position=pos, goal_yaw=0.0, commanded_speed=1.0,
                      source_domain=Domain.D2_WEBER, phase=MissionPhase.FLIGHT,
                      goal_velocity=Vec3(1.0, 0.0, 0.0))
        w = ctl.control_step(state, sp)
        assert w.torque[1] > 0.0

    def test_thrust_capped(self):
        params = DroneParams()
        ctl = Controller(ControllerConfig(), params)
        state = make_drone(pos=(0.0, 0.0, 0.0))
        w = ctl.control_step(state, hover_setpoint(Vec3(0.0, 0.0, 50.0)))
        assert w.thrust <= params.max_thrust


class TestFlappingBody:
    def test_free_fall_matches_closed_form(self):
        # T = 0.5 s at dt = 2 ms under gravity only.
        params = DroneParams(drag_coeff=0.0)
        body = FlappingBody(params, make_drone(pos=(0.0, 0.0, 10.0)))
        state = body.step(Wrench(0.0, (0.0, 0.0, 0.0)), 0.002, 250)
        T = 0.5
        assert state.velocity.z == pytest.approx(-GRAVITY * T, abs=1e-9)
        assert state.position.z - 10.0 == pytest.approx(
            -0.5 * GRAVITY * T * T, abs=1e-9)
        assert state.position.x == 0.0 and state.velocity.x == 0.0

    def test_exact_hover_is_stationary(self):
        body = FlappingBody(EXACT_PARAMS, make_drone(pos=(0.3, -0.2, 1.2)))
        thrust = EXACT_PARAMS.mass * GRAVITY
        state = body.step(Wrench(thrust, (0.0, 0.0, 0.0)), 0.002, 1000)
        assert state.position == Vec3(0.3, -0.2, 1.2)
        assert state.velocity == Vec3()

    def test_pure_z_spin_preserves_rate_and_precesses_yaw(self):
        initial = DroneState(position=Vec3(0.0, 0.0, 1.0),
                             angular_velocity=Vec3(0.0, 0.0, 2.0))
        body = FlappingBody(EXACT_PARAMS, initial)
        thrust = EXACT_PARAMS.mass * GRAVITY
        state = body.step(Wrench(thrust, (0.0, 0.0, 0.0)), 0.002, 250)
        assert state.angular_velocity == Vec3(0.0, 0.0, 2.0)
        assert state.yaw() == pytest.approx(1.0, abs=1e-3)
        assert abs(quat_norm(state.orientation) - 1.0) <= 1e-12

    def test_quaternion_norm_after_a_million_steps(self):
        initial = DroneState(angular_velocity=Vec3(0.3, -0.4, 0.5))
        body = FlappingBody(DroneParams(), initial)
        state = body.step(Wrench(0.0, (0.0, 0.0, 0.0)), 1e-4, 1_000_000)
        assert abs(quat_norm(state.orientation) - 1.0) < 1e-9

    def test_flap_ripple_is_phase_deterministic(self):
        params = DroneParams(flap_ripple=0.3)
        w = Wrench(params.mass * GRAVITY, (0.0, 0.0, 0.0))
        a = FlappingBody(params, make_drone(pos=(0.0, 0.0, 1.0)))
        b = FlappingBody(params, make_drone(pos=(0.0, 0.0, 1.0)))
        shifted = FlappingBody(params, make_drone(pos=(0.0, 0.0, 1.0)),
                               t0=0.0123)
        for _ in range(40):
            sa = a.step(w, 0.002, 5)
            sb = b.step(w, 0.002, 5)
            ss = shifted.step(w, 0.002, 5)
        assert sa == sb
        assert ss.position.z != sa.position.z

    def test_divergence_raises(self):
        params = DroneParams(max_torque=1e15)
        body = FlappingBody(params, make_drone())
        with pytest.raises(SimulationDiverged):
            body.step(Wrench(0.0, (1e15, 1e14, 1e13)), 0.002, 1000)

    def test_wrench_saturation(self):
        params = DroneParams()
        body = FlappingBody(params, make_drone(pos=(0.0, 0.0, 1.0)))
        capped = FlappingBody(params, make_drone(pos=(0.0, 0.0, 1.0)))
        body.step(Wrench(1e9, (0.0, 0.0, 0.0)), 0.002, 10)
        capped.step(Wrench(params.max_thrust, (0.0, 0.0, 0.0)), 0.002, 10)
        assert body.state == capped.state

    def test_time_counts_in_steps(self):
        body = FlappingBody(DroneParams(), make_drone(), t0=1.0)
        body.step(Wrench(0.0, (0.0, 0.0, 0.0)), 0.002, 7)
        assert body.time(0.002) == pytest.approx(1.014)

    def test_step_validates_args(self):
        body = FlappingBody(DroneParams(), make_drone())
        with pytest.raises(ValueError):
            body.step(Wrench(0.0, (0.0, 0.0, 0.0)), 0.0, 1)
        with pytest.raises(ValueError):
            body.step(Wrench(0.0, (0.0, 0.0, 0.0)), 0.002, 0)


class TestIdealTracking:
    def test_teleports_with_consistent_velocity(self):
        state = make_drone(pos=(0.0, 0.0, 1.0))
        sp = hover_setpoint(Vec3(0.2, 0.0, 1.1), yaw=0.3)
        nxt = ideal_tracking_step(state, sp, 0.1)
        assert nxt.position == Vec3(0.2, 0.0, 1.1)
        assert nxt.velocity.x == pytest.approx(2.0)
        assert nxt.yaw() == pytest.approx(0.3)
        assert nxt.angular_velocity == Vec3()

    def test_rejects_zero_dt(self):
        with pytest.raises(ValueError):
            ideal_tracking_step(make_drone(), hover_setpoint(Vec3()), 0.0)


def test_physics_step_wrapper_matches_body():
    params = DroneParams()
    start = make_drone(pos=(0.0, 0.0, 1.0))
    w = Wrench(params.mass * GRAVITY * 1.1, (0.0, 1e-4, 0.0))
    via_wrapper = physics_step(start, w, params, 0.002)
    body = FlappingBody(params, start)
    via_body = body.step(w, 0.002, 1)
    assert via_wrapper == via_body
