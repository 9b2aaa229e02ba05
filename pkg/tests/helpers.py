"""Shared builders for the test suite."""

from palmland.geom import DroneState, Pose, UserModel, Vec3, quat_from_yaw


def make_user(chest=(0.0, 0.0, 1.25), palm=(0.65, 0.0, 1.1), yaw=0.0,
              arm_length=0.65, elbow=1.0, eye=1.6) -> UserModel:
    q = quat_from_yaw(yaw)
    return UserModel(
        chest=Pose(Vec3(*chest), q),
        palm=Pose(Vec3(*palm), q),
        arm_length=arm_length,
        elbow_height=elbow,
        eye_height=eye,
    )


def make_drone(pos=(0.0, 0.0, 0.0), vel=(0.0, 0.0, 0.0), yaw=0.0) -> DroneState:
    return DroneState(
        position=Vec3(*pos),
        velocity=Vec3(*vel),
        orientation=quat_from_yaw(yaw),
        angular_velocity=Vec3(),
    )
