"""Shared world-frame types and 3D geometry helpers.

Conventions used everywhere in this package:
  - right-handed world frame, z up, meters, seconds
  - quaternions are scalar-first [w, x, y, z], unit norm
  - yaw is the rotation about +z, in (-pi, pi]
  - planner-level distances are measured in the horizontal (xy) plane;
    altitude is a separate channel
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

UNIT_NORM_TOL = 1e-6


class GeometryError(ValueError):
    """Degenerate geometry (coincident points, zero-length axis, ...)."""


@dataclass(frozen=True)
class Vec3:
    """Immutable 3D vector in meters."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Vec3 components must be finite, got {self!r}")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def with_z(self, z: float) -> "Vec3":
        return Vec3(self.x, self.y, z)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def horizontal_distance(a: Vec3, b: Vec3) -> float:
    """Distance between a and b projected onto the xy plane."""
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


def distance_3d(a: Vec3, b: Vec3) -> float:
    return (a - b).norm()


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


# ---------------------------------------------------------------------------
# Quaternions (scalar-first tuples)
# ---------------------------------------------------------------------------

Quat = tuple[float, float, float, float]

IDENTITY_QUAT: Quat = (1.0, 0.0, 0.0, 0.0)


def quat_norm(q: Quat) -> float:
    w, x, y, z = q
    return math.sqrt(w * w + x * x + y * y + z * z)


def quat_normalize(q: Quat) -> Quat:
    n = quat_norm(q)
    if n < 1e-12:
        raise GeometryError("cannot normalize near-zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def quat_mul(a: Quat, b: Quat) -> Quat:
    """Hamilton product a * b."""
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return (
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


def quat_from_yaw(yaw: float) -> Quat:
    h = 0.5 * yaw
    return (math.cos(h), 0.0, 0.0, math.sin(h))


def quaternion_yaw(q: Quat) -> float:
    """Yaw (rotation about +z) of a unit quaternion, in (-pi, pi].

    Raises ValueError if the quaternion is not unit within 1e-6.
    """
    if abs(quat_norm(q) - 1.0) > UNIT_NORM_TOL:
        raise ValueError(f"quaternion is not unit norm: {q!r}")
    w, x, y, z = q
    return math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))


def quat_to_matrix(q: Quat) -> tuple[tuple[float, float, float], ...]:
    """3x3 rotation matrix of a unit quaternion (rows as tuples)."""
    w, x, y, z = q
    return (
        (1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)),
        (2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)),
        (2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)),
    )


def quat_from_matrix(m: tuple[tuple[float, float, float], ...]) -> Quat:
    """Unit quaternion from a rotation matrix (Shepperd's method)."""
    tr = m[0][0] + m[1][1] + m[2][2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = (0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s)
    elif m[0][0] > m[1][1] and m[0][0] > m[2][2]:
        s = math.sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0
        q = ((m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s)
    elif m[1][1] > m[2][2]:
        s = math.sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0
        q = ((m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s)
    else:
        s = math.sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0
        q = ((m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s)
    return quat_normalize(q)


def rotate_vec(q: Quat, v: Vec3) -> Vec3:
    """Rotate v by the unit quaternion q."""
    m = quat_to_matrix(q)
    return Vec3(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )


def quat_to_euler(q: Quat) -> tuple[float, float, float]:
    """ZYX euler angles (roll, pitch, yaw) of a unit quaternion."""
    w, x, y, z = q
    roll = math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    s = 2.0 * (w * y - z * x)
    s = max(-1.0, min(1.0, s))
    pitch = math.asin(s)
    yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    return roll, pitch, yaw


# ---------------------------------------------------------------------------
# Poses and bodies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Pose:
    """Position + unit-quaternion orientation."""

    position: Vec3 = field(default_factory=Vec3)
    orientation: Quat = IDENTITY_QUAT

    def __post_init__(self):
        n = quat_norm(self.orientation)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"Pose orientation must be unit norm, |q|={n}")

    def yaw(self) -> float:
        return quaternion_yaw(self.orientation)


@dataclass(frozen=True)
class UserModel:
    """Virtual user: chest and palm poses plus body geometry.

    arm_length is the radius of the reachable circle centered at the chest;
    the elbow/eye heights bound the altitude band the drone is allowed to
    occupy while interacting.
    """

    chest: Pose
    palm: Pose
    arm_length: float = 0.65
    elbow_height: float = 1.0
    eye_height: float = 1.6

    ARM_SLACK = 0.05  # tolerance on palm reach, absorbs tracking noise

    def __post_init__(self):
        if self.arm_length <= 0.0:
            raise ValueError("arm_length must be > 0")
        if not (self.eye_height > self.elbow_height > 0.0):
            raise ValueError("need eye_height > elbow_height > 0")
        reach = distance_3d(self.palm.position, self.chest.position)
        if reach > self.arm_length + self.ARM_SLACK:
            raise ValueError(
                f"palm {reach:.3f} m from chest exceeds arm length "
                f"{self.arm_length:.3f} m (+{self.ARM_SLACK} slack)"
            )


@dataclass(frozen=True)
class DroneState:
    """Rigid-body state of the drone (angular velocity in body frame)."""

    position: Vec3 = field(default_factory=Vec3)
    velocity: Vec3 = field(default_factory=Vec3)
    orientation: Quat = IDENTITY_QUAT
    angular_velocity: Vec3 = field(default_factory=Vec3)

    def __post_init__(self):
        n = quat_norm(self.orientation)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"orientation must be unit norm, |q|={n}")

    def yaw(self) -> float:
        return quaternion_yaw(self.orientation)

    def speed(self) -> float:
        return self.velocity.norm()
