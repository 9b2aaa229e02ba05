"""Pure-Python twin of the compiled physics kernel.

Keep this file and _kernels.pyx in lockstep: same arithmetic, same operation
order, so the two backends produce bit-identical trajectories. The state
vector layout is
    [x, y, z, vx, vy, vz, qw, qx, qy, qz, wx, wy, wz]
with position/velocity in the world frame and angular velocity in the body
frame. Velocities advance by explicit Euler and positions by the step-average
velocity, so constant-acceleration displacement is reproduced exactly. The
quaternion is renormalized every step.
"""

from math import isfinite, pi, sin, sqrt

BACKEND = "python"

GRAVITY = 9.81
TWO_PI = 2.0 * pi


def physics_run(state, fx, fy, fz, taux, tauy, tauz,
                mass, ixx, iyy, izz, drag, flap_freq, flap_ripple,
                dt, t0, n):
    """Advance a rigid body n steps of dt under a constant body-frame wrench.

    The body-z thrust component carries a deterministic flapping ripple,
    flap_ripple * sin(2*pi*flap_freq*t), evaluated at the start of each step.
    Mutates state in place; returns False if the state went non-finite.
    """
    x = float(state[0]); y = float(state[1]); z = float(state[2])
    vx = float(state[3]); vy = float(state[4]); vz = float(state[5])
    qw = float(state[6]); qx = float(state[7]); qy = float(state[8]); qz = float(state[9])
    wx = float(state[10]); wy = float(state[11]); wz = float(state[12])

    inv_m = 1.0 / mass

    for i in range(n):
        t = t0 + i * dt
        fz_eff = fz
        if flap_ripple != 0.0:
            fz_eff = fz * (1.0 + flap_ripple * sin(TWO_PI * flap_freq * t))

        r00 = 1.0 - 2.0 * (qy * qy + qz * qz)
        r01 = 2.0 * (qx * qy - qw * qz)
        r02 = 2.0 * (qx * qz + qw * qy)
        r10 = 2.0 * (qx * qy + qw * qz)
        r11 = 1.0 - 2.0 * (qx * qx + qz * qz)
        r12 = 2.0 * (qy * qz - qw * qx)
        r20 = 2.0 * (qx * qz - qw * qy)
        r21 = 2.0 * (qy * qz + qw * qx)
        r22 = 1.0 - 2.0 * (qx * qx + qy * qy)

        fwx = r00 * fx + r01 * fy + r02 * fz_eff
        fwy = r10 * fx + r11 * fy + r12 * fz_eff
        fwz = r20 * fx + r21 * fy + r22 * fz_eff

        vx0 = vx; vy0 = vy; vz0 = vz
        vx = vx + dt * ((fwx - drag * vx) * inv_m)
        vy = vy + dt * ((fwy - drag * vy) * inv_m)
        vz = vz + dt * ((fwz - drag * vz) * inv_m - GRAVITY)
        x = x + dt * 0.5 * (vx0 + vx)
        y = y + dt * 0.5 * (vy0 + vy)
        z = z + dt * 0.5 * (vz0 + vz)

        # Euler's equations with diagonal inertia: I w_dot = tau - w x (I w)
        cx = wy * (izz * wz) - wz * (iyy * wy)
        cy = wz * (ixx * wx) - wx * (izz * wz)
        cz = wx * (iyy * wy) - wy * (ixx * wx)
        wx = wx + dt * ((taux - cx) / ixx)
        wy = wy + dt * ((tauy - cy) / iyy)
        wz = wz + dt * ((tauz - cz) / izz)

        # q_dot = 0.5 * q (x) (0, w_body)
        dqw = 0.5 * (-qx * wx - qy * wy - qz * wz)
        dqx = 0.5 * (qw * wx + qy * wz - qz * wy)
        dqy = 0.5 * (qw * wy - qx * wz + qz * wx)
        dqz = 0.5 * (qw * wz + qx * wy - qy * wx)
        qw = qw + dt * dqw
        qx = qx + dt * dqx
        qy = qy + dt * dqy
        qz = qz + dt * dqz
        qn = sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        qw = qw / qn
        qx = qx / qn
        qy = qy / qn
        qz = qz / qn

    state[0] = x; state[1] = y; state[2] = z
    state[3] = vx; state[4] = vy; state[5] = vz
    state[6] = qw; state[7] = qx; state[8] = qy; state[9] = qz
    state[10] = wx; state[11] = wy; state[12] = wz

    s = x + y + z + vx + vy + vz + qw + qx + qy + qz + wx + wy + wz
    return isfinite(s)
