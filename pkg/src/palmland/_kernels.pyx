# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled physics kernel. Mirror of _kernels_py.py: keep the arithmetic and
operation order identical so both backends stay bit-compatible (build with
-ffp-contract=off)."""

from libc.math cimport isfinite, sin, sqrt

BACKEND = "compiled"

cdef double GRAVITY = 9.81
cdef double TWO_PI = 6.283185307179586476925287


def physics_run(double[::1] state, double fx, double fy, double fz,
                double taux, double tauy, double tauz,
                double mass, double ixx, double iyy, double izz,
                double drag, double flap_freq, double flap_ripple,
                double dt, double t0, long n):
    """Advance a rigid body n steps of dt under a constant body-frame wrench.

    Same contract as the pure-Python twin: mutates state (layout
    [x y z vx vy vz qw qx qy qz wx wy wz]) in place, returns False if the
    state went non-finite.
    """
    cdef double x = state[0], y = state[1], z = state[2]
    cdef double vx = state[3], vy = state[4], vz = state[5]
    cdef double qw = state[6], qx = state[7], qy = state[8], qz = state[9]
    cdef double wx = state[10], wy = state[11], wz = state[12]

    cdef double inv_m = 1.0 / mass
    cdef double t, fz_eff, vx0, vy0, vz0
    cdef double r00, r01, r02, r10, r11, r12, r20, r21, r22
    cdef double fwx, fwy, fwz, cx, cy, cz
    cdef double dqw, dqx, dqy, dqz, qn, s
    cdef long i

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

        cx = wy * (izz * wz) - wz * (iyy * wy)
        cy = wz * (ixx * wx) - wx * (izz * wz)
        cz = wx * (iyy * wy) - wy * (ixx * wx)
        wx = wx + dt * ((taux - cx) / ixx)
        wy = wy + dt * ((tauy - cy) / iyy)
        wz = wz + dt * ((tauz - cz) / izz)

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
    return bool(isfinite(s))
