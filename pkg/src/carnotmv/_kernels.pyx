# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bisection kernels.

Single fused pass per F evaluation with Kahan-compensated summation; the
numpy fallback in ``_kernels_py`` carries the same contracts.
"""

import numpy as np

from libc.math cimport fabs, pow as cpow

BACKEND = "cython"


cdef double _f_eval(const double[::1] u, const double[::1] w,
                    double pm1, double lam) noexcept nogil:
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double s = 0.0, comp = 0.0
    cdef double d, term, y, t
    for i in range(n):
        d = u[i] - lam
        if d > 0.0:
            term = w[i] * cpow(d, pm1)
        elif d < 0.0:
            term = -w[i] * cpow(-d, pm1)
        else:
            continue
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
    return s


cdef double _bisect(const double[::1] u, const double[::1] w,
                    double p, double tol, int max_iter) noexcept nogil:
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double lo = u[0], hi = u[0]
    cdef double mid, f, scale, pm1 = p - 1.0
    cdef int it
    for i in range(1, n):
        if u[i] < lo:
            lo = u[i]
        if u[i] > hi:
            hi = u[i]
    if lo == hi:
        return lo
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        f = _f_eval(u, w, pm1, mid)
        if f > 0.0:
            lo = mid
        elif f < 0.0:
            hi = mid
        else:
            return mid
        scale = fabs(lo)
        if fabs(hi) > scale:
            scale = fabs(hi)
        if scale < 1.0:
            scale = 1.0
        if hi - lo <= tol * scale:
            break
    return 0.5 * (lo + hi)


def f_residual(double[::1] values, double[::1] weights, double p, double lam):
    if values.shape[0] != weights.shape[0]:
        raise ValueError("values and weights must have equal length")
    with nogil:
        out = _f_eval(values, weights, p - 1.0, lam)
    return out


def mu_p_bisect(double[::1] values, double[::1] weights, double p,
                double tol=1e-12, int max_iter=200):
    if values.shape[0] != weights.shape[0]:
        raise ValueError("values and weights must have equal length")
    if values.shape[0] == 0:
        raise ValueError("values must be nonempty")
    with nogil:
        out = _bisect(values, weights, p, tol, max_iter)
    return out


def mu_p_bisect_rows(double[:, ::1] values, double[:, ::1] weights, double p,
                     double tol=1e-12, int max_iter=200):
    if values.shape[0] != weights.shape[0] or values.shape[1] != weights.shape[1]:
        raise ValueError("values and weights must have equal shape")
    out_arr = np.empty(values.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t r
    with nogil:
        for r in range(values.shape[0]):
            out[r] = _bisect(values[r], weights[r], p, tol, max_iter)
    return out_arr
