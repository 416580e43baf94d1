# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled integrator kernels.

Mirrors _kernels_py exactly: same state layout, Butcher tableau, step
control and status codes.  Keep the two files in sync.
"""

from libc.math cimport ceil, fabs, isfinite, sqrt, INFINITY

import numpy as np

STATUS_OK = 0
STATUS_LEFT_DOMAIN = 1
STATUS_STEP_LIMIT = 2
STATUS_NO_PROGRESS = 3

METHOD_RK4 = 0
METHOD_RK45 = 1

# Fehlberg 4(5); fifth-order solution propagated, fourth-order difference
# drives step control.
cdef double A21 = 1.0 / 4.0
cdef double A31 = 3.0 / 32.0, A32 = 9.0 / 32.0
cdef double A41 = 1932.0 / 2197.0, A42 = -7200.0 / 2197.0, A43 = 7296.0 / 2197.0
cdef double A51 = 439.0 / 216.0, A52 = -8.0, A53 = 3680.0 / 513.0, A54 = -845.0 / 4104.0
cdef double A61 = -8.0 / 27.0, A62 = 2.0, A63 = -3544.0 / 2565.0
cdef double A64 = 1859.0 / 4104.0, A65 = -11.0 / 40.0
cdef double B1 = 16.0 / 135.0, B3 = 6656.0 / 12825.0, B4 = 28561.0 / 56430.0
cdef double B5 = -9.0 / 50.0, B6 = 2.0 / 55.0
cdef double E1 = 1.0 / 360.0, E3 = -128.0 / 4275.0, E4 = -2197.0 / 75240.0
cdef double E5 = 1.0 / 50.0, E6 = 2.0 / 55.0

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 5.0

cdef int C_OK = 0
cdef int C_LEFT = 1
cdef int C_LIMIT = 2
cdef int C_STUCK = 3


cdef void _eval_polyset(const long long[::1] offsets, const long long[:, ::1] exps,
                        const double[::1] coefs, const double[::1] x,
                        double[::1] out) noexcept nogil:
    cdef Py_ssize_t m = out.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, t, v
    cdef long long e
    cdef double acc, term, base
    for i in range(m):
        acc = 0.0
        for t in range(offsets[i], offsets[i + 1]):
            term = coefs[t]
            for v in range(n):
                e = exps[t, v]
                base = x[v]
                while e > 0:
                    term *= base
                    e -= 1
            acc += term
        out[i] = acc


cdef void _rhs(Py_ssize_t n, Py_ssize_t k, bint track_integral,
               double traj_sign, double mat_sign,
               const long long[::1] f_off, const long long[:, ::1] f_exps,
               const double[::1] f_coefs,
               const long long[::1] g_off, const long long[:, ::1] g_exps,
               const double[::1] g_coefs,
               const double[::1] y, double[::1] dy,
               double[::1] xbuf, double[::1] fbuf, double[::1] gbuf) noexcept nogil:
    cdef Py_ssize_t kk = k * k
    cdef Py_ssize_t i, j, l
    cdef double acc
    for i in range(n):
        xbuf[i] = y[i]
    _eval_polyset(f_off, f_exps, f_coefs, xbuf, fbuf)
    _eval_polyset(g_off, g_exps, g_coefs, xbuf, gbuf)
    for i in range(n):
        dy[i] = traj_sign * fbuf[i]
    for i in range(k):
        for j in range(k):
            acc = 0.0
            for l in range(k):
                acc += gbuf[i * k + l] * y[n + l * k + j]
            dy[n + i * k + j] = mat_sign * acc
    if track_integral:
        for i in range(kk):
            dy[n + kk + i] = mat_sign * gbuf[i]


cdef bint _outside(const double[::1] y, const double[::1] lo, const double[::1] hi,
                   Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(n):
        if y[i] < lo[i] or y[i] > hi[i]:
            return True
    return False


cdef bint _finite(const double[::1] v, Py_ssize_t dim) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(dim):
        if not isfinite(v[i]):
            return False
    return True


def integrate_matrix_ode(
    Py_ssize_t n,
    Py_ssize_t k,
    f_offsets,
    f_exps,
    f_coefs,
    g_offsets,
    g_exps,
    g_coefs,
    x0,
    m0,
    double duration,
    double traj_sign,
    double mat_sign,
    bint track_integral,
    int method,
    double step,
    double abs_tol,
    double rel_tol,
    long long max_steps,
    box_lo,
    box_hi,
):
    """Advance the coupled trajectory/matrix system over [0, duration].

    Returns (status, x, m_flat, q_flat, accepted_steps); see _kernels_py for
    the state layout and status contract.
    """
    cdef const long long[::1] foff = f_offsets
    cdef const long long[:, ::1] fexps = f_exps
    cdef const double[::1] fcoefs = f_coefs
    cdef const long long[::1] goff = g_offsets
    cdef const long long[:, ::1] gexps = g_exps
    cdef const double[::1] gcoefs = g_coefs
    cdef const double[::1] lo = np.ascontiguousarray(box_lo, dtype=np.float64)
    cdef const double[::1] hi = np.ascontiguousarray(box_hi, dtype=np.float64)
    cdef const double[::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef const double[::1] m0v = np.ascontiguousarray(m0, dtype=np.float64)

    cdef Py_ssize_t kk = k * k
    cdef Py_ssize_t dim = n + kk + (kk if track_integral else 0)
    y_arr = np.zeros(dim)
    ynew_arr = np.empty(dim)
    ytmp_arr = np.empty(dim)
    k1_arr = np.empty(dim)
    k2_arr = np.empty(dim)
    k3_arr = np.empty(dim)
    k4_arr = np.empty(dim)
    k5_arr = np.empty(dim)
    k6_arr = np.empty(dim)
    xbuf_arr = np.empty(n)
    fbuf_arr = np.empty(n)
    gbuf_arr = np.empty(kk)
    cdef double[::1] y = y_arr
    cdef double[::1] ynew = ynew_arr
    cdef double[::1] ytmp = ytmp_arr
    cdef double[::1] k1 = k1_arr
    cdef double[::1] k2 = k2_arr
    cdef double[::1] k3 = k3_arr
    cdef double[::1] k4 = k4_arr
    cdef double[::1] k5 = k5_arr
    cdef double[::1] k6 = k6_arr
    cdef double[::1] xbuf = xbuf_arr
    cdef double[::1] fbuf = fbuf_arr
    cdef double[::1] gbuf = gbuf_arr

    cdef Py_ssize_t i
    for i in range(n):
        y[i] = x0v[i]
    for i in range(kk):
        y[n + i] = m0v[i]

    cdef int status = C_OK
    cdef long long accepted = 0
    cdef long long attempts = 0
    cdef long long nsteps, istep
    cdef double t = 0.0
    cdef double h, remaining, err_norm, factor, e, sc, ssum, tiny, ay, aynew

    if duration == 0.0:
        return _pack(y_arr, n, kk, track_integral, STATUS_OK, 0)

    if method == METHOD_RK4:
        nsteps = <long long>ceil(duration / step)
        if nsteps < 1:
            nsteps = 1
        if nsteps > max_steps:
            return _pack(y_arr, n, kk, track_integral, STATUS_STEP_LIMIT, 0)
        h = duration / nsteps
        with nogil:
            for istep in range(nsteps):
                _rhs(n, k, track_integral, traj_sign, mat_sign,
                     foff, fexps, fcoefs, goff, gexps, gcoefs, y, k1, xbuf, fbuf, gbuf)
                for i in range(dim):
                    ytmp[i] = y[i] + 0.5 * h * k1[i]
                _rhs(n, k, track_integral, traj_sign, mat_sign,
                     foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k2, xbuf, fbuf, gbuf)
                for i in range(dim):
                    ytmp[i] = y[i] + 0.5 * h * k2[i]
                _rhs(n, k, track_integral, traj_sign, mat_sign,
                     foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k3, xbuf, fbuf, gbuf)
                for i in range(dim):
                    ytmp[i] = y[i] + h * k3[i]
                _rhs(n, k, track_integral, traj_sign, mat_sign,
                     foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k4, xbuf, fbuf, gbuf)
                for i in range(dim):
                    y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                accepted += 1
                if not _finite(y, dim):
                    status = C_STUCK
                    break
                if _outside(y, lo, hi, n):
                    status = C_LEFT
                    break
        return _pack(y_arr, n, kk, track_integral, status, accepted)

    h = duration * 1e-2
    tiny = 1e-14 * (1.0 if duration < 1.0 else duration)
    with nogil:
        while True:
            remaining = duration - t
            if remaining <= tiny:
                break
            if attempts >= max_steps:
                status = C_LIMIT
                break
            if h < tiny:
                status = C_STUCK
                break
            if h > remaining:
                h = remaining
            attempts += 1

            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, y, k1, xbuf, fbuf, gbuf)
            for i in range(dim):
                ytmp[i] = y[i] + h * (A21 * k1[i])
            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k2, xbuf, fbuf, gbuf)
            for i in range(dim):
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k3, xbuf, fbuf, gbuf)
            for i in range(dim):
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k4, xbuf, fbuf, gbuf)
            for i in range(dim):
                ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k5, xbuf, fbuf, gbuf)
            for i in range(dim):
                ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            _rhs(n, k, track_integral, traj_sign, mat_sign,
                 foff, fexps, fcoefs, goff, gexps, gcoefs, ytmp, k6, xbuf, fbuf, gbuf)

            ssum = 0.0
            err_norm = 0.0
            for i in range(dim):
                ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i]
                                      + B5 * k5[i] + B6 * k6[i])
                e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i])
                ay = fabs(y[i])
                aynew = fabs(ynew[i])
                sc = abs_tol + rel_tol * (ay if ay > aynew else aynew)
                ssum += (e / sc) * (e / sc)
            if _finite(ynew, dim) and isfinite(ssum):
                err_norm = sqrt(ssum / dim)
            else:
                err_norm = INFINITY

            if err_norm <= 1.0:
                t += h
                for i in range(dim):
                    y[i] = ynew[i]
                accepted += 1
                if _outside(y, lo, hi, n):
                    status = C_LEFT
                    break
                factor = MAX_FACTOR if err_norm == 0.0 else SAFETY * err_norm ** -0.2
            else:
                factor = 0.0 if err_norm == INFINITY else SAFETY * err_norm ** -0.2
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            elif factor > MAX_FACTOR:
                factor = MAX_FACTOR
            h *= factor
    return _pack(y_arr, n, kk, track_integral, status, accepted)


def _pack(y_arr, Py_ssize_t n, Py_ssize_t kk, bint track_integral, int status, long long steps):
    x_out = np.array(y_arr[:n])
    m_out = np.array(y_arr[n:n + kk])
    q_out = np.array(y_arr[n + kk:]) if track_integral else np.zeros(kk)
    return status, x_out, m_out, q_out, steps
