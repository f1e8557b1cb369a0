"""Compiled Taylor-series kernels for the reduced (5) and extended (15) systems.

Coefficients are generated order by order with the usual automatic
differentiation recurrences: Cauchy products, the reciprocal ``1/x2`` and the
real powers ``u**(-3/2)``, ``u**(-5/2)`` of ``u = 4 x1**2 + x2**2``.
"""
import numpy as np
from numba import njit

# status codes returned by the kernels
OK = 0
COLLISION = 1
UNDERFLOW = 2
NONFINITE = 3


@njit(cache=True)
def _cauchy(p, q, k):
    s = 0.0
    for j in range(k + 1):
        s += p[j] * q[k - j]
    return s


@njit(cache=True)
def coefficients(x0, a, order):
    """Taylor coefficients ``c[i, k]`` of each variable about the current time."""
    n = x0.shape[0]
    m = order + 1
    c = np.zeros((n, m))
    for i in range(n):
        c[i, 0] = x0[i]
    x1sq = np.zeros(m)
    x2sq = np.zeros(m)
    x1x2 = np.zeros(m)
    u = np.zeros(m)
    w = np.zeros(m)  # u^-3/2
    v = np.zeros(m)  # u^-5/2
    y = np.zeros(m)  # 1/x2
    y2 = np.zeros(m)
    y3 = np.zeros(m)
    y4 = np.zeros(m)
    lin_f = np.zeros(m)  # 3200 x1^2 - 400 x2^2
    lin_r = np.zeros(m)  # -300 a^2 / x2^4 + 50 / x2^3 - 200 u^-3/2
    g8 = np.zeros(m)
    g9 = np.zeros(m)
    g13 = np.zeros(m)
    g14 = np.zeros(m)
    f = np.empty(n)
    a2 = a * a
    x1 = c[0]
    x2 = c[1]
    for k in range(order):
        x1sq[k] = _cauchy(x1, x1, k)
        x2sq[k] = _cauchy(x2, x2, k)
        x1x2[k] = _cauchy(x1, x2, k)
        u[k] = 4.0 * x1sq[k] + x2sq[k]
        if k == 0:
            w[0] = u[0] ** -1.5
            v[0] = u[0] ** -2.5
            y[0] = 1.0 / x2[0]
        else:
            sw = 0.0
            sv = 0.0
            for j in range(k):
                sw += (-1.5 * (k - j) - j) * u[k - j] * w[j]
                sv += (-2.5 * (k - j) - j) * u[k - j] * v[j]
            w[k] = sw / (k * u[0])
            v[k] = sv / (k * u[0])
            sy = 0.0
            for j in range(1, k + 1):
                sy += x2[j] * y[k - j]
            y[k] = -sy * y[0]
        y2[k] = _cauchy(y, y, k)
        y3[k] = _cauchy(y2, y, k)

        f[0] = c[2, k]
        f[1] = c[3, k]
        f[2] = -400.0 * _cauchy(x1, w, k)
        f[3] = 100.0 * a2 * y3[k] - 25.0 * y2[k] - 200.0 * _cauchy(x2, w, k)
        f[4] = 10.0 * a * y2[k]
        if n == 15:
            y4[k] = _cauchy(y2, y2, k)
            lin_f[k] = 3200.0 * x1sq[k] - 400.0 * x2sq[k]
            lin_r[k] = -300.0 * a2 * y4[k] + 50.0 * y3[k] - 200.0 * w[k]
            g8[k] = _cauchy(lin_f, c[5], k) + 1200.0 * _cauchy(x1x2, c[6], k)
            g9[k] = 2400.0 * _cauchy(x1x2, c[5], k) + 600.0 * _cauchy(x2sq, c[6], k)
            g13[k] = _cauchy(lin_f, c[10], k) + 1200.0 * _cauchy(x1x2, c[11], k)
            g14[k] = 2400.0 * _cauchy(x1x2, c[10], k) + 600.0 * _cauchy(x2sq, c[11], k)
            f[5] = c[7, k]
            f[6] = c[8, k]
            f[7] = _cauchy(v, g8, k)
            f[8] = _cauchy(lin_r, c[6], k) + _cauchy(v, g9, k) + 200.0 * a * y3[k]
            f[9] = 10.0 * y2[k] - 20.0 * a * _cauchy(y3, c[6], k)
            f[10] = c[12, k]
            f[11] = c[13, k]
            f[12] = _cauchy(v, g13, k)
            f[13] = _cauchy(lin_r, c[11], k) + _cauchy(v, g14, k)
            f[14] = -20.0 * a * _cauchy(y3, c[11], k)
        for i in range(n):
            c[i, k + 1] = f[i] / (k + 1)
    return c


@njit(cache=True)
def horner(c, h):
    n, m = c.shape
    out = np.empty(n)
    for i in range(n):
        s = c[i, m - 1]
        for k in range(m - 2, -1, -1):
            s = s * h + c[i, k]
        out[i] = s
    return out


@njit(cache=True)
def step_size(c, tol, h_max):
    """Step from the last two coefficients, and the matching error estimate."""
    n, m = c.shape
    p = m - 1
    n1 = 0.0
    n2 = 0.0
    for i in range(n):
        n1 = max(n1, abs(c[i, p - 1]))
        n2 = max(n2, abs(c[i, p]))
    h = h_max
    if n1 > 0.0:
        h = min(h, (tol / n1) ** (1.0 / (p - 1)))
    if n2 > 0.0:
        h = min(h, (tol / n2) ** (1.0 / p))
    h = min(0.9 * h, h_max)
    return h, max(n1 * h ** (p - 1), n2 * h**p)


@njit(cache=True)
def _state_tol(x, abs_tol, rel_tol):
    big = 0.0
    for i in range(x.shape[0]):
        big = max(big, abs(x[i]))
    return max(abs_tol, rel_tol * big)


@njit(cache=True)
def _collides(x, floor):
    return x[1] <= floor or np.sqrt(x[1] * x[1] + 4.0 * x[0] * x[0]) <= floor


@njit(cache=True)
def propagate(x0, a, t0, t_end, order, abs_tol, rel_tol, h_max, h_min, floor, max_steps):
    """Integrate from t0 to t_end (either direction), no dense output.

    Returns (state, t reached, steps taken, min R at step nodes, status).
    """
    x = x0.copy()
    t = t0
    direction = 1.0 if t_end >= t0 else -1.0
    r_min = x[1]
    nsteps = 0
    if _collides(x, floor):
        return x, t, nsteps, r_min, COLLISION
    while direction * (t_end - t) > 0.0:
        if nsteps >= max_steps:
            return x, t, nsteps, r_min, UNDERFLOW
        c = coefficients(x, a, order)
        h, err = step_size(c, _state_tol(x, abs_tol, rel_tol), h_max)
        remaining = direction * (t_end - t)
        last = h >= remaining
        if last:
            h = remaining
        elif h < h_min:
            return x, t, nsteps, r_min, UNDERFLOW
        xn = horner(c, direction * h)
        for i in range(xn.shape[0]):
            if not np.isfinite(xn[i]):
                return x, t, nsteps, r_min, NONFINITE
        x = xn
        t = t_end if last else t + direction * h
        nsteps += 1
        if x[1] < r_min:
            r_min = x[1]
        if _collides(x, floor):
            return x, t, nsteps, r_min, COLLISION
    return x, t, nsteps, r_min, OK
