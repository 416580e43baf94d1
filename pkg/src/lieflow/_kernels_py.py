"""Pure-Python integrator kernels.

Semantics (state layout, Butcher tableau, step control, status codes) are
mirrored exactly by the compiled Cython backend in ``_kernels.pyx``; keep
the two in sync.

The integrated system couples a trajectory with a matrix transported along
it:

    x' = traj_sign * F(x)              x in R^n
    M' = mat_sign  * G(x) M            M in R^(k x k), row-major
    Q' = mat_sign  * G(x)              accumulated only if track_integral

F is a packed set of n polynomials, G a packed set of k*k polynomials (the
flow Jacobian for variational transport, or a structure matrix for the
linear cocycle).  The box constraint applies to the x part only.
"""

from __future__ import annotations

import math

import numpy as np

STATUS_OK = 0
STATUS_LEFT_DOMAIN = 1
STATUS_STEP_LIMIT = 2
STATUS_NO_PROGRESS = 3

METHOD_RK4 = 0
METHOD_RK45 = 1

# Fehlberg 4(5) pair.  The fifth-order solution is propagated; the
# difference against the embedded fourth-order one drives step control.
_A21 = 1.0 / 4.0
_A31, _A32 = 3.0 / 32.0, 9.0 / 32.0
_A41, _A42, _A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
_A51, _A52, _A53, _A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
_A61, _A62, _A63, _A64, _A65 = (
    -8.0 / 27.0,
    2.0,
    -3544.0 / 2565.0,
    1859.0 / 4104.0,
    -11.0 / 40.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    16.0 / 135.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
)
_E1, _E3, _E4, _E5, _E6 = (
    1.0 / 360.0,
    -128.0 / 4275.0,
    -2197.0 / 75240.0,
    1.0 / 50.0,
    2.0 / 55.0,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def eval_polyset(offsets, exps, coefs, x):
    """Evaluate a packed polynomial set at ``x``; one value per polynomial."""
    values = coefs * np.prod(np.power(x[None, :], exps), axis=1)
    return np.add.reduceat(values, offsets[:-1])


def integrate_matrix_ode(
    n,
    k,
    f_offsets,
    f_exps,
    f_coefs,
    g_offsets,
    g_exps,
    g_coefs,
    x0,
    m0,
    duration,
    traj_sign,
    mat_sign,
    track_integral,
    method,
    step,
    abs_tol,
    rel_tol,
    max_steps,
    box_lo,
    box_hi,
):
    """Advance the coupled system over [0, duration].

    Returns (status, x, m_flat, q_flat, accepted_steps).  On
    STATUS_LEFT_DOMAIN the state of the exiting step is returned so callers
    can report where the trajectory escaped.
    """
    kk = k * k
    dim = n + kk + (kk if track_integral else 0)
    y = np.zeros(dim)
    y[:n] = x0
    y[n : n + kk] = m0

    def rhs(state):
        x = state[:n]
        out = np.empty(dim)
        out[:n] = traj_sign * eval_polyset(f_offsets, f_exps, f_coefs, x)
        gmat = mat_sign * eval_polyset(g_offsets, g_exps, g_coefs, x).reshape(k, k)
        out[n : n + kk] = (gmat @ state[n : n + kk].reshape(k, k)).ravel()
        if track_integral:
            out[n + kk :] = gmat.ravel()
        return out

    def unpack(state, status, steps):
        q = state[n + kk :].copy() if track_integral else np.zeros(kk)
        return status, state[:n].copy(), state[n : n + kk].copy(), q, steps

    def outside(state):
        x = state[:n]
        return bool(np.any(x < box_lo) or np.any(x > box_hi))

    if duration == 0.0:
        return unpack(y, STATUS_OK, 0)

    if method == METHOD_RK4:
        nsteps = max(1, math.ceil(duration / step))
        if nsteps > max_steps:
            return unpack(y, STATUS_STEP_LIMIT, 0)
        h = duration / nsteps
        for i in range(nsteps):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * h * k1)
            k3 = rhs(y + 0.5 * h * k2)
            k4 = rhs(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(y)):
                return unpack(y, STATUS_NO_PROGRESS, i + 1)
            if outside(y):
                return unpack(y, STATUS_LEFT_DOMAIN, i + 1)
        return unpack(y, STATUS_OK, nsteps)

    t = 0.0
    h = duration * 1e-2
    tiny = 1e-14 * max(1.0, duration)
    accepted = 0
    attempts = 0
    while True:
        remaining = duration - t
        if remaining <= tiny:
            return unpack(y, STATUS_OK, accepted)
        if attempts >= max_steps:
            return unpack(y, STATUS_STEP_LIMIT, accepted)
        if h < tiny:
            return unpack(y, STATUS_NO_PROGRESS, accepted)
        h = min(h, remaining)
        attempts += 1

        k1 = rhs(y)
        k2 = rhs(y + h * (_A21 * k1))
        k3 = rhs(y + h * (_A31 * k1 + _A32 * k2))
        k4 = rhs(y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = rhs(y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = rhs(y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6)

        if np.all(np.isfinite(y_new)) and np.all(np.isfinite(err)):
            scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
        else:
            err_norm = math.inf

        if err_norm <= 1.0:
            t += h
            y = y_new
            accepted += 1
            if outside(y):
                return unpack(y, STATUS_LEFT_DOMAIN, accepted)
            factor = _MAX_FACTOR if err_norm == 0.0 else _SAFETY * err_norm ** -0.2
        else:
            factor = 0.0 if math.isinf(err_norm) else _SAFETY * err_norm ** -0.2
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
