# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the table refinement and box-sum loops.

Every floating-point operation mirrors ``_pykernels`` in value and order, so
the two back ends produce identical tables and sums.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, ceil, fabs, nextafter, INFINITY

cnp.import_array()

cdef double PAD = 1e-12


cdef inline double _up(double v) nogil:
    return v + PAD * (1.0 + fabs(v))


cdef inline double _lookup(const double[:, ::1] values, Py_ssize_t row, double v,
                           double x_min, double inv_beta, Py_ssize_t nx) nogil:
    cdef double idx
    if v == INFINITY:
        return 0.0
    idx = ceil((_up(v) - x_min) * inv_beta)
    if idx > nx - 1:
        return 0.0
    if idx < 0:
        return values[row, 0]
    return values[row, <Py_ssize_t>idx]


cdef inline Py_ssize_t _class_row(double v, double inv_beta, Py_ssize_t na) nogil:
    cdef double cls = ceil(_up(v) * inv_beta) - 1.0
    if cls < 0.0:
        cls = 0.0
    if cls > na - 1.0:
        cls = na - 1.0
    return <Py_ssize_t>cls


def refine_pass(double[:, ::1] values, double beta, double x_min,
                signed char[::1] sgn_x_minus_1, signed char[::1] sgn_x_plus_1):
    cdef Py_ssize_t na = values.shape[0]
    cdef Py_ssize_t nx = values.shape[1]
    cdef double inv_beta = 1.0 / beta
    out_arr = np.empty((na, nx), dtype=np.float64)
    running_arr = np.full(nx, INFINITY)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] running = running_arr
    cdef Py_ssize_t i, j, ci
    cdef double a_lo, a_hi, s_lo, s_hi, x, fm, fp, t, xc, crit, cand, exact
    with nogil:
        for j in range(na):
            a_lo = j * beta
            a_hi = (j + 1) * beta
            s_lo = sqrt(1.0 - a_lo * a_lo)
            if j < na - 1:
                s_hi = sqrt(1.0 - a_hi * a_hi)
                ci = _class_row(a_hi / s_hi, inv_beta, na)
            else:
                s_hi = 0.0
                ci = na - 1
            for i in range(nx):
                x = x_min + beta * <double>i
                fm = (x - a_lo) / s_lo
                fp = (x + a_lo) / s_lo
                if j < na - 1:
                    t = (x - a_hi) / s_hi
                    if t > fm:
                        fm = t
                    t = (x + a_hi) / s_hi
                    if t > fp:
                        fp = t
                else:
                    if sgn_x_minus_1[i] > 0:
                        fm = INFINITY
                    elif sgn_x_minus_1[i] == 0 and fm < 0.0:
                        fm = 0.0
                    if sgn_x_plus_1[i] > 0:
                        fp = INFINITY
                    elif sgn_x_plus_1[i] == 0 and fp < 0.0:
                        fp = 0.0
                if x < -1.0:
                    xc = -1.0 / x
                    if xc >= a_lo - 1e-9 and xc <= a_hi + 1e-9:
                        t = x * x - 1.0
                        if t < 0.0:
                            t = 0.0
                        crit = -sqrt(t)
                        if crit > fp:
                            fp = crit
                cand = nextafter(0.5 * (_lookup(values, ci, fm, x_min, inv_beta, nx)
                                        + _lookup(values, ci, fp, x_min, inv_beta, nx)), -INFINITY)
                if j == na - 1:
                    exact = 0.5 * ((1.0 if sgn_x_minus_1[i] <= 0 else 0.0)
                                   + (1.0 if sgn_x_plus_1[i] <= 0 else 0.0))
                    if exact < cand:
                        cand = exact
                if cand < running[i]:
                    running[i] = cand
                out[j, i] = values[j, i] if values[j, i] > running[i] else running[i]
    return out_arr


def box_sum(double[:, ::1] values, double beta, double x_min,
            double[::1] lo, double[::1] hi, double s):
    cdef Py_ssize_t na = values.shape[0]
    cdef Py_ssize_t nx = values.shape[1]
    cdef double inv_beta = 1.0 / beta
    cdef Py_ssize_t r = lo.shape[0]
    cdef Py_ssize_t n_pat = (<Py_ssize_t>1) << r
    cdef Py_ssize_t b, i, ci = 0
    cdef double mag = 0.0, sum_lo2 = 0.0, sum_hi2 = 0.0
    cdef double h, y, var_lo, var_hi, sig_lo = 0.0, sig_hi, total = 0.0, v
    cdef bint degenerate
    for i in range(r):
        mag += hi[i]
        sum_lo2 += lo[i] * lo[i]
        sum_hi2 += hi[i] * hi[i]
    var_lo = 1.0 - sum_hi2 - PAD
    var_hi = 1.0 - sum_lo2 + PAD
    sig_hi = sqrt(var_hi if var_hi > 0.0 else 0.0) * (1.0 + PAD)
    degenerate = not (var_lo > 0.0)
    if degenerate:
        if sig_hi <= 0.0:
            return 0.0
        ci = na - 1
    else:
        sig_lo = sqrt(var_lo)
        ci = _class_row(hi[r - 1] / sig_lo, inv_beta, na)
    with nogil:
        for b in range(n_pat):
            h = 0.0
            for i in range(r):
                if (b >> i) & 1:
                    h = h + hi[i]
                else:
                    h = h + (-lo[i])
            y = s + (h + PAD * (1.0 + mag))
            if degenerate:
                if y < 0.0:
                    v = _lookup(values, ci, y / sig_hi, x_min, inv_beta, nx)
                else:
                    v = 0.0
            elif y >= 0.0:
                v = _lookup(values, ci, y / sig_lo, x_min, inv_beta, nx)
            else:
                v = _lookup(values, ci, y / sig_hi, x_min, inv_beta, nx)
            total = total + v
    return total * (1.0 - (n_pat + 2) * 2.220446049250313e-16)
