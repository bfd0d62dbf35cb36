"""Compiled Runge-Kutta-Fehlberg 4(5) kernel and the right-hand sides it drives.

Every right-hand side has the signature ``rhs(t, y, params) -> dy`` where
``params`` is a float64 array. The integrator takes the right-hand side as a
first-class function so one compiled loop serves all systems.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NONFINITE = 2

# Fehlberg tableau
C2, C3, C4, C5, C6 = 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0
A21 = 1.0 / 4.0
A31, A32 = 3.0 / 32.0, 9.0 / 32.0
A41, A42, A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
A51, A52, A53, A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
A61, A62, A63, A64, A65 = -8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0
# fifth-order weights (propagated)
B1, B3, B4, B5, B6 = 16.0 / 135.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0
# fifth minus fourth order weights
E1, E3, E4, E5, E6 = 1.0 / 360.0, -128.0 / 4275.0, -2197.0 / 75240.0, 1.0 / 50.0, 2.0 / 55.0

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@njit(cache=True)
def rkf45(rhs, params, t0, y0, t_rec, rtol, atol, h_init, h_min, h_max):
    """Integrate from ``(t0, y0)`` to ``t_rec[-1]``, sampling at ``t_rec``.

    Samples between accepted steps use cubic Hermite interpolation on the
    step end points and their derivatives. Returns
    ``(y_rec, n_accepted, n_rejected, status, t_fail)``.
    """
    n = y0.shape[0]
    n_rec = t_rec.shape[0]
    y_rec = np.empty((n_rec, n))
    t_end = t_rec[n_rec - 1]

    t = t0
    y = y0.copy()
    k1 = rhs(t, y, params)
    rec = 0
    while rec < n_rec and t_rec[rec] <= t:
        y_rec[rec, :] = y
        rec += 1

    h = min(h_init, h_max)
    n_acc = 0
    n_rej = 0
    ynew = np.empty(n)
    tmp = np.empty(n)
    while rec < n_rec:
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for i in range(n):
            tmp[i] = y[i] + h * A21 * k1[i]
        k2 = rhs(t + C2 * h, tmp, params)
        for i in range(n):
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        k3 = rhs(t + C3 * h, tmp, params)
        for i in range(n):
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        k4 = rhs(t + C4 * h, tmp, params)
        for i in range(n):
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        k5 = rhs(t + C5 * h, tmp, params)
        for i in range(n):
            tmp[i] = y[i] + h * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        k6 = rhs(t + C6 * h, tmp, params)

        err = 0.0
        finite = True
        for i in range(n):
            ynew[i] = y[i] + h * (
                B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
            )
            if not np.isfinite(ynew[i]):
                finite = False
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            r = abs(e) / sc
            if r > err:
                err = r
        if not finite or not np.isfinite(err):
            if h <= h_min:
                return y_rec, n_acc, n_rej, STATUS_NONFINITE, t
            n_rej += 1
            h = max(h * FAC_MIN, h_min)
            continue

        if err <= 1.0:
            t_new = t_end if last else t + h
            k_end = rhs(t_new, ynew, params)
            for i in range(n):
                if not np.isfinite(k_end[i]):
                    return y_rec, n_acc, n_rej, STATUS_NONFINITE, t_new
            # dense output on [t, t_new]
            while rec < n_rec and t_rec[rec] <= t_new:
                s = (t_rec[rec] - t) / h
                s2 = s * s
                s3 = s2 * s
                h00 = 2.0 * s3 - 3.0 * s2 + 1.0
                h10 = s3 - 2.0 * s2 + s
                h01 = -2.0 * s3 + 3.0 * s2
                h11 = s3 - s2
                for i in range(n):
                    y_rec[rec, i] = (
                        h00 * y[i] + h10 * h * k1[i] + h01 * ynew[i] + h11 * h * k_end[i]
                    )
                rec += 1
            t = t_new
            y[:] = ynew
            k1 = k_end
            n_acc += 1
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = min(FAC_MAX, max(FAC_MIN, SAFETY * err ** (-0.2)))
            h = min(max(h * fac, h_min), h_max)
        else:
            if h <= h_min:
                return y_rec, n_acc, n_rej, STATUS_UNDERFLOW, t
            n_rej += 1
            fac = max(FAC_MIN, SAFETY * err ** (-0.2))
            h = max(h * fac, h_min)
    return y_rec, n_acc, n_rej, STATUS_OK, t


# -- friction model kernels ---------------------------------------------------
# params layout:
#  0 M, 1 V0, 2 D, 3 K1, 4 K2, 5 mu_s, 6 mu_k, 7 Vs, 8 U0, 9 N0, 10 Omega,
#  11 sigma0, 12 sigma1, 13 sigma2, 14 z_ba, 15 z_max


@njit(cache=True)
def sgn(v):
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


@njit(cache=True)
def stribeck(v_r, N0, mu_s, mu_k, Vs):
    return N0 * (mu_k + (mu_s - mu_k) * np.exp(-(v_r * v_r) / (Vs * Vs)))


@njit(cache=True)
def alpha_z(z, v_r, z_ba, z_max):
    if v_r * z < 0.0:
        return 0.0
    az = abs(z)
    if az <= z_ba:
        return 0.0
    if az >= z_max:
        return 1.0
    return 0.5 * (np.sin(np.pi * (az - 0.5 * (z_max + z_ba)) / (z_max - z_ba)) + 1.0)


@njit(cache=True)
def bristle(z, v_r, p):
    a = alpha_z(z, v_r, p[14], p[15])
    if a == 0.0:
        return v_r
    g = stribeck(v_r, p[9], p[5], p[6], p[7])
    if g <= 0.0:
        # frictionless limit (N0 = 0): no saturation of the bristle
        return v_r
    return (1.0 - a * (p[11] / g) * z * sgn(v_r)) * v_r


@njit(cache=True)
def mob_rhs(t, y, p):
    x = y[0]
    xd = y[1]
    z = y[2]
    v_r = p[1] - xd
    zd = bristle(z, v_r, p)
    f_r = p[11] * z + p[12] * zd + p[13] * v_r
    M = p[0]
    out = np.empty(3)
    out[0] = xd
    out[1] = (
        -(p[2] / M) * xd
        - (p[3] / M) * x * x * x
        - (p[4] / M) * x
        + (p[9] / M) * f_r
        + (p[8] / M) * np.sin(p[10] * t)
    )
    out[2] = zd
    return out


# -- verification systems -----------------------------------------------------


@njit(cache=True)
def molaie_rhs(t, y, p):
    a = p[0]
    out = np.empty(3)
    out[0] = y[1]
    out[1] = y[2]
    out[2] = -a * y[0] - y[1] - 4.0 * y[2] + y[1] * y[1] + y[0] * y[1]
    return out


@njit(cache=True)
def molaie_jac(y, p):
    a = p[0]
    J = np.zeros((3, 3))
    J[0, 1] = 1.0
    J[1, 2] = 1.0
    J[2, 0] = -a + y[1]
    J[2, 1] = -1.0 + 2.0 * y[1] + y[0]
    J[2, 2] = -4.0
    return J


@njit(cache=True)
def molaie_variational_rhs(t, y, p):
    # y = [x (3), Phi (3x3 row-major)]
    out = np.empty(12)
    x = y[:3]
    f = molaie_rhs(t, x, p)
    J = molaie_jac(x, p)
    out[:3] = f
    phi = y[3:].reshape((3, 3))
    out[3:] = (J @ phi).ravel()
    return out


@njit(cache=True)
def linear_rhs(t, y, p):
    n = y.shape[0]
    A = p.reshape((n, n))
    return A @ y


@njit(cache=True)
def linear_variational_rhs(t, y, p):
    # y = [x (n), Phi (n x n row-major)], with n*n + n == len(y)
    n = int(np.sqrt(y.shape[0] + 0.25))
    A = p.reshape((n, n))
    out = np.empty(y.shape[0])
    out[:n] = A @ y[:n]
    out[n:] = (A @ y[n:].reshape((n, n))).ravel()
    return out
