"""Pure-numpy implementations of the hot loops.

These are the reference versions; the compiled module ``_ckernels`` performs
the same floating-point operations in the same order and must agree bit for
bit.
"""
import math

import numpy as np

PAD = 1e-12
INF = math.inf


def up(v):
    """Push a computed argument upward past any accumulated rounding error."""
    return v + PAD * (1.0 + np.abs(v))


def x_index(v, x_min, inv_beta):
    """Index of the smallest x grid point at or above ``v`` (may be out of range)."""
    return np.ceil((up(v) - x_min) * inv_beta)


def a_index(v, inv_beta):
    """Index of the smallest a grid point ``(j+1)*beta`` at or above ``v``."""
    return np.ceil(up(v) * inv_beta) - 1.0


def _lookup_row(row, idx, nx):
    """``row[idx]`` with the out-of-range conventions of the table."""
    idx = np.where(np.isnan(idx), nx, idx)
    above = idx > nx - 1
    safe = np.clip(idx, 0, nx - 1).astype(np.int64)
    return np.where(above, 0.0, row[safe])


def refine_pass(values, beta, x_min, sgn_x_minus_1, sgn_x_plus_1):
    """One application of the elimination recursion, without the monotone closure.

    ``values[j, i]`` bounds ``P(X >= x_min + i*beta)`` over the class with
    largest weight ``<= (j+1)*beta``.  Candidate first weights are covered by the
    intervals ``(j*beta, (j+1)*beta]``; each is evaluated with its worst-case
    (largest) arguments.  ``sgn_x_minus_1``/``sgn_x_plus_1`` hold the exact signs
    of ``x_i - 1`` and ``x_i + 1``.
    """
    na, nx = values.shape
    inv_beta = 1.0 / beta
    xs = x_min + beta * np.arange(nx, dtype=np.float64)
    out = np.empty_like(values)
    running = np.full(nx, INF)
    crit = np.where(xs < -1.0, -np.sqrt(np.maximum(xs * xs - 1.0, 0.0)), -INF)
    for j in range(na):
        a_lo = j * beta
        a_hi = (j + 1) * beta
        s_lo = math.sqrt(1.0 - a_lo * a_lo)
        fm = (xs - a_lo) / s_lo
        fp = (xs + a_lo) / s_lo
        if j < na - 1:
            s_hi = math.sqrt(1.0 - a_hi * a_hi)
            cls = a_index(a_hi / s_hi, inv_beta)
            fm = np.maximum(fm, (xs - a_hi) / s_hi)
            fp = np.maximum(fp, (xs + a_hi) / s_hi)
        else:
            cls = na - 1.0
            fm = np.where(sgn_x_minus_1 > 0, INF, np.where(sgn_x_minus_1 == 0, np.maximum(fm, 0.0), fm))
            fp = np.where(sgn_x_plus_1 > 0, INF, np.where(sgn_x_plus_1 == 0, np.maximum(fp, 0.0), fp))
        xc = np.where(xs < -1.0, -1.0 / np.where(xs < -1.0, xs, -2.0), 2.0)
        inside = (xc >= a_lo - 1e-9) & (xc <= a_hi + 1e-9)
        fp = np.where(inside, np.maximum(fp, crit), fp)
        ci = int(min(max(cls, 0.0), na - 1.0))
        row = values[ci]
        im = np.where(np.isinf(fm) & (fm > 0), INF, x_index(fm, x_min, inv_beta))
        ip = np.where(np.isinf(fp) & (fp > 0), INF, x_index(fp, x_min, inv_beta))
        cand = np.nextafter(0.5 * (_lookup_row(row, im, nx) + _lookup_row(row, ip, nx)), -INF)
        if j == na - 1:
            # The first weight equal to 1 exactly: X is a single sign.
            exact = 0.5 * ((sgn_x_minus_1 <= 0).astype(np.float64) + (sgn_x_plus_1 <= 0).astype(np.float64))
            cand = np.minimum(cand, exact)
        running = np.minimum(running, cand)
        out[j] = np.maximum(values[j], running)
    return out


def monotone_closure(values):
    """Raise every entry to the largest value at larger x or larger a (in place)."""
    np.maximum.accumulate(values[:, ::-1], axis=1, out=values[:, ::-1])
    np.maximum.accumulate(values[::-1, :], axis=0, out=values[::-1, :])
    np.clip(values, 0.0, 1.0, out=values)
    return values


def box_sum(values, beta, x_min, lo, hi, s):
    """Conservative ``sum_z D(.)`` over the sign patterns of one box.

    Returns the (downward-rounded) sum of table lookups; the caller divides by
    ``2^r``.  ``lo``/``hi`` are the box endpoints, ``s`` the threshold rounded up.
    """
    na, nx = values.shape
    inv_beta = 1.0 / beta
    r = len(lo)
    n_pat = 1 << r
    pat = np.arange(n_pat, dtype=np.int64)
    h = np.zeros(n_pat)
    mag = 0.0
    sum_lo2 = 0.0
    sum_hi2 = 0.0
    for i in range(r):
        plus = ((pat >> i) & 1).astype(bool)
        h = h + np.where(plus, hi[i], -lo[i])
        mag += hi[i]
        sum_lo2 += lo[i] * lo[i]
        sum_hi2 += hi[i] * hi[i]
    y = s + (h + PAD * (1.0 + mag))
    var_lo = 1.0 - sum_hi2 - PAD
    var_hi = 1.0 - sum_lo2 + PAD
    sig_hi = math.sqrt(max(var_hi, 0.0)) * (1.0 + PAD)
    if var_lo > 0.0:
        sig_lo = math.sqrt(var_lo)
        cls = a_index(hi[r - 1] / sig_lo, inv_beta)
        ci = int(min(max(cls, 0.0), na - 1.0))
        arg = np.where(y >= 0.0, y / sig_lo, y / sig_hi)
        vals = _lookup_row(values[ci], x_index(arg, x_min, inv_beta), nx)
    else:
        if sig_hi <= 0.0:
            return 0.0
        arg = y / sig_hi
        vals = np.where(y < 0.0, _lookup_row(values[na - 1], x_index(arg, x_min, inv_beta), nx), 0.0)
    total = float(np.cumsum(vals)[-1])
    return total * (1.0 - (n_pat + 2) * 2.220446049250313e-16)
