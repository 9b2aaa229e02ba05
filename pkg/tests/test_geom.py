"""Vectors, angles, quaternions and the pose/body types."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from palmland.geom import (
    IDENTITY_QUAT,
    DroneState,
    GeometryError,
    Pose,
    UserModel,
    Vec3,
    distance_3d,
    horizontal_distance,
    quat_from_matrix,
    quat_from_yaw,
    quat_mul,
    quat_norm,
    quat_normalize,
    quat_to_euler,
    quat_to_matrix,
    quaternion_yaw,
    rotate_vec,
    wrap_angle,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False,
                   allow_infinity=False)
angles = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def unit_quats():
    """Uniform-ish unit quaternions from normalized gaussian 4-vectors."""
    comp = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
    return (st.tuples(comp, comp, comp, comp)
            .filter(lambda q: quat_norm(q) > 1e-3)
            .map(quat_normalize))


class TestVec3:
    def test_arithmetic(self):
        a = Vec3(1.0, 2.0, 3.0)
        b = Vec3(0.5, -1.0, 2.0)
        assert a + b == Vec3(1.5, 1.0, 5.0)
        assert a - b == Vec3(0.5, 3.0, 1.0)
        assert a.scaled(2.0) == Vec3(2.0, 4.0, 6.0)
        assert a.with_z(9.0) == Vec3(1.0, 2.0, 9.0)
        assert a.as_tuple() == (1.0, 2.0, 3.0)

    def test_norm(self):
        assert Vec3(3.0, 4.0, 0.0).norm() == 5.0
        assert Vec3().norm() == 0.0

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError, match="finite"):
            Vec3(bad, 0.0, 0.0)

    def test_distances(self):
        a = Vec3(0.0, 0.0, 0.0)
        b = Vec3(3.0, 4.0, 12.0)
        assert horizontal_distance(a, b) == 5.0
        assert distance_3d(a, b) == 13.0


class TestWrapAngle:
    @pytest.mark.parametrize("raw,expect", [
        (0.0, 0.0),
        (math.pi, math.pi),
        (-math.pi, math.pi),  # boundary folds into (-pi, pi]
        (2.0 * math.pi, 0.0),
        (3.0 * math.pi, math.pi),
        (-0.5, -0.5),
    ])
    def test_known_values(self, raw, expect):
        assert wrap_angle(raw) == pytest.approx(expect, abs=1e-12)

    @given(angles)
    def test_range_and_equivalence(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi + 1e-12
        k = (a - w) / (2.0 * math.pi)
        assert abs(k - round(k)) < 1e-9


class TestQuaternions:
    def test_identity(self):
        assert quat_norm(IDENTITY_QUAT) == 1.0
        assert quaternion_yaw(IDENTITY_QUAT) == 0.0
        q = quat_from_yaw(0.7)
        assert quat_mul(IDENTITY_QUAT, q) == pytest.approx(q)

    def test_normalize_zero_raises(self):
        with pytest.raises(GeometryError):
            quat_normalize((0.0, 0.0, 0.0, 0.0))

    def test_yaw_requires_unit_norm(self):
        with pytest.raises(ValueError, match="unit"):
            quaternion_yaw((2.0, 0.0, 0.0, 0.0))

    @given(st.floats(min_value=-math.pi + 1e-6, max_value=math.pi,
                     allow_nan=False))
    def test_yaw_roundtrip(self, yaw):
        assert quaternion_yaw(quat_from_yaw(yaw)) == pytest.approx(yaw, abs=1e-9)

    @given(unit_quats())
    def test_matrix_roundtrip(self, q):
        q2 = quat_from_matrix(quat_to_matrix(q))
        # q and -q encode the same rotation; compare via the dot product.
        dot = abs(sum(a * b for a, b in zip(q, q2)))
        assert dot == pytest.approx(1.0, abs=1e-9)

    @given(unit_quats(), st.tuples(finite, finite, finite))
    def test_rotation_preserves_length(self, q, v):
        vec = Vec3(*v)
        assert rotate_vec(q, vec).norm() == pytest.approx(vec.norm(), rel=1e-9,
                                                          abs=1e-9)

    @given(unit_quats(), unit_quats())
    def test_mul_consistent_with_matrices(self, a, b):
        v = Vec3(0.3, -0.7, 0.2)
        lhs = rotate_vec(quat_mul(a, b), v)
        rhs = rotate_vec(a, rotate_vec(b, v))
        assert lhs.x == pytest.approx(rhs.x, abs=1e-9)
        assert lhs.y == pytest.approx(rhs.y, abs=1e-9)
        assert lhs.z == pytest.approx(rhs.z, abs=1e-9)

    def test_euler_of_pure_yaw(self):
        roll, pitch, yaw = quat_to_euler(quat_from_yaw(1.1))
        assert roll == pytest.approx(0.0, abs=1e-12)
        assert pitch == pytest.approx(0.0, abs=1e-12)
        assert yaw == pytest.approx(1.1, abs=1e-12)

    def test_yaw_rotates_x_axis(self):
        v = rotate_vec(quat_from_yaw(math.pi / 2.0), Vec3(1.0, 0.0, 0.0))
        assert v.x == pytest.approx(0.0, abs=1e-12)
        assert v.y == pytest.approx(1.0, abs=1e-12)


class TestPoseAndBodies:
    def test_pose_rejects_non_unit_quat(self):
        with pytest.raises(ValueError, match="unit"):
            Pose(Vec3(), (1.0, 1.0, 0.0, 0.0))

    def test_pose_yaw(self):
        assert Pose(Vec3(), quat_from_yaw(0.4)).yaw() == pytest.approx(0.4)

    def test_user_model_reach_check(self):
        with pytest.raises(ValueError, match="arm length"):
            UserModel(chest=Pose(Vec3(0.0, 0.0, 1.25)),
                      palm=Pose(Vec3(1.5, 0.0, 1.1)), arm_length=0.65)

    def test_user_model_reach_slack(self):
        # 0.69 m palm offset on a 0.65 m arm sits inside the 0.05 slack.
        user = UserModel(chest=Pose(Vec3(0.0, 0.0, 1.1)),
                         palm=Pose(Vec3(0.69, 0.0, 1.1)), arm_length=0.65)
        assert user.arm_length == 0.65

    def test_user_model_height_ordering(self):
        with pytest.raises(ValueError, match="eye_height"):
            UserModel(chest=Pose(Vec3()), palm=Pose(Vec3(0.1, 0.0, 0.0)),
                      elbow_height=1.6, eye_height=1.0)

    def test_user_model_positive_arm(self):
        with pytest.raises(ValueError, match="arm_length"):
            UserModel(chest=Pose(Vec3()), palm=Pose(Vec3()), arm_length=0.0)

    def test_drone_state(self):
        d = DroneState(position=Vec3(1.0, 0.0, 2.0),
                       velocity=Vec3(3.0, 4.0, 0.0),
                       orientation=quat_from_yaw(0.3),
                       angular_velocity=Vec3())
        assert d.speed() == 5.0
        assert d.yaw() == pytest.approx(0.3)
        with pytest.raises(ValueError, match="unit"):
            DroneState(orientation=(0.5, 0.5, 0.5, 0.6))
