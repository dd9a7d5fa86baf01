"""Conservative evaluation of the Prawitz smoothing bound.

For a unit-variance Rademacher sum whose largest weight is at most ``a``,

    P(X >= x) >= F(a, x, T, q) = 1/2 - I_g - I_h - I_e

where ``I_g``, ``I_h`` are integrals of ``|k| * g`` over ``[0, q]`` and
``|k| * h`` over ``[q, 1]``, and ``I_e`` integrates ``k * exp(-(Tu)^2/2)`` over
``[0, q]``.  Each integral is bounded from above by splitting its range into
uniform panels and enclosing the integrand on every panel with outward-rounded
interval arithmetic, so the returned number never exceeds ``F``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
# Relative + absolute padding applied after every elementary operation; covers
# libm/numpy errors of a few ulps.
_REL = 8.0 * np.finfo(float).eps
_ABS = 1e-300
# First positive minimum of sin(z)/z and a safe lower bound for its value.
_SINC_ARGMIN = 4.493409457909064
_SINC_MIN = -0.2173
_SINC_SECOND_MAX = 0.1285


@dataclass(frozen=True)
class PrawitzParams:
    T: float
    q: float
    subdivisions: int = 1024

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1]")
        if int(self.subdivisions) < 1:
            raise ValueError("need at least one quadrature panel")


@dataclass(frozen=True)
class ThetaConstant:
    """Root of ``exp(-t^2/2) + cos(t)`` on ``[0, pi]`` as ``value +- radius``."""

    value: float
    radius: float

    @property
    def lo(self) -> float:
        return self.value - self.radius

    @property
    def hi(self) -> float:
        return self.value + self.radius


def _theta_residual(t):
    return mpmath.exp(-t * t / 2) + mpmath.cos(t)


def solve_theta(tolerance: float = 1e-12) -> ThetaConstant:
    """Bisection for the root of ``exp(-t^2/2) = -cos(t)`` in ``[0, pi]``.

    The returned bracket is certified with mpmath interval arithmetic: the
    residual is strictly positive at the left end and strictly negative at the
    right end.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    with mpmath.workdps(40):
        lo, hi = mpmath.mpf(0), mpmath.pi
        while hi - lo > tolerance:
            mid = (lo + hi) / 2
            if _theta_residual(mid) > 0:
                lo = mid
            else:
                hi = mid
        # Round the bracket outward to doubles before certifying it.
        flo = math.nextafter(float(lo), -math.inf)
        fhi = math.nextafter(float(hi), math.inf)
        iv = mpmath.iv
        r_lo = iv.exp(-iv.mpf(flo) ** 2 / 2) + iv.cos(iv.mpf(flo))
        r_hi = iv.exp(-iv.mpf(fhi) ** 2 / 2) + iv.cos(iv.mpf(fhi))
        if not (r_lo.a > 0 and r_hi.b < 0):
            raise ArithmeticError("could not certify the theta bracket")
    return ThetaConstant(value=(flo + fhi) / 2, radius=math.nextafter((fhi - flo) / 2, math.inf))


_THETA = solve_theta(1e-12)


# ---------------------------------------------------------------------------
# Interval helpers on numpy arrays.  An interval is a (lo, hi) pair of arrays.


def _pad(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo - (np.abs(lo) * _REL + _ABS), hi + (np.abs(hi) * _REL + _ABS)


def _mul(a, b):
    p = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return _pad(np.minimum.reduce(p), np.maximum.reduce(p))


def _add(a, b):
    return _pad(a[0] + b[0], a[1] + b[1])


def _scale(a, c: float):
    if c >= 0:
        return _pad(a[0] * c, a[1] * c)
    return _pad(a[1] * c, a[0] * c)


def _div_pos(a, b):
    """``a / b`` for ``b`` strictly positive."""
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (a[0] / b[0], a[0] / b[1], a[1] / b[0], a[1] / b[1])
    lo, hi = _pad(np.minimum.reduce(q), np.maximum.reduce(q))
    bad = b[0] <= 0
    return np.where(bad, -np.inf, lo), np.where(bad, np.inf, hi)


def _contains_point(lo, hi, offset, period=TWO_PI):
    """True where ``[lo, hi]`` might contain ``offset + period * j`` for some integer j."""
    slack = 1e-12 * (1.0 + np.abs(lo) + np.abs(hi))
    j = np.ceil((lo - slack - offset) / period)
    return offset + period * j <= hi + slack


def _sin(a):
    lo, hi = a
    s_lo, s_hi = np.sin(lo), np.sin(hi)
    out_lo, out_hi = _pad(np.minimum(s_lo, s_hi), np.maximum(s_lo, s_hi))
    wide = (hi - lo) >= TWO_PI
    out_hi = np.where(_contains_point(lo, hi, HALF_PI) | wide, 1.0, out_hi)
    out_lo = np.where(_contains_point(lo, hi, -HALF_PI) | wide, -1.0, out_lo)
    return np.maximum(out_lo, -1.0), np.minimum(out_hi, 1.0)


def _cos(a):
    lo, hi = a
    c_lo, c_hi = np.cos(lo), np.cos(hi)
    out_lo, out_hi = _pad(np.minimum(c_lo, c_hi), np.maximum(c_lo, c_hi))
    wide = (hi - lo) >= TWO_PI
    out_hi = np.where(_contains_point(lo, hi, 0.0) | wide, 1.0, out_hi)
    out_lo = np.where(_contains_point(lo, hi, PI) | wide, -1.0, out_lo)
    return np.maximum(out_lo, -1.0), np.minimum(out_hi, 1.0)


def _sinc_point(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(z == 0.0, 1.0, np.sin(z) / np.where(z == 0.0, 1.0, z))
    return out


def _sinc(a):
    """Enclosure of ``sin(z)/z`` (even, decreasing on ``[0, 4.49]``)."""
    lo, hi = a
    m = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    big = np.maximum(np.abs(lo), np.abs(hi))
    s_m, s_big = _sinc_point(m), _sinc_point(big)
    in_mono = big <= _SINC_ARGMIN
    out_lo = np.where(in_mono, s_big, np.maximum(_SINC_MIN, np.where(m > 0, -1.0 / np.maximum(m, 1e-300), -1.0)))
    out_hi = np.where(
        m <= _SINC_ARGMIN,
        np.where(in_mono, s_m, np.maximum(s_m, _SINC_SECOND_MAX)),
        1.0 / np.maximum(m, 1e-300),
    )
    out_lo, out_hi = _pad(out_lo, out_hi)
    return np.maximum(out_lo, _SINC_MIN), np.minimum(out_hi, 1.0)


def _exp_neg_half_sq(v):
    """Enclosure of ``exp(-v^2/2)`` for ``v >= 0``."""
    lo, hi = v
    return _pad(np.exp(-0.5 * hi * hi), np.exp(-0.5 * lo * lo))


def _kernel_interval(u_lo, u_hi, x, T):
    """Enclosure of ``k(u, x, T)`` over panels ``[u_lo, u_hi]``, broadcast against ``x``.

    Two algebraically equal forms avoid the removable singularities:
    on panels ending at or before 1/2

        (1-u) [cos(Tux) + cos(pi u) (Tx/pi) sinc(Tux) / sinc(pi u)] + sin(Tux)/pi

    and elsewhere

        sin(pi u + Tux) / (pi sinc(pi (1-u))) + sin(Tux)/pi.
    """
    u_lo, u_hi, x = np.broadcast_arrays(
        np.asarray(u_lo, dtype=float), np.asarray(u_hi, dtype=float), np.asarray(x, dtype=float)
    )
    shape = u_lo.shape
    u_lo, u_hi, x = u_lo.ravel(), u_hi.ravel(), x.ravel()
    lo = np.empty_like(u_lo)
    hi = np.empty_like(u_lo)
    use_a = (u_hi <= 0.5) | ((u_lo <= 0.0) & (u_hi < 1.0))
    use_b = ~use_a & (u_lo > 0.0)
    lo[:], hi[:] = -np.inf, np.inf  # panels touching both singular ends stay unbounded
    for mask, form in ((use_a, _kernel_form_a), (use_b, _kernel_form_b)):
        if mask.any():
            lo[mask], hi[mask] = form((u_lo[mask], u_hi[mask]), T * x[mask])
    return lo.reshape(shape), hi.reshape(shape)


def _linear(u, slope):
    """Enclosure of ``slope * u``."""
    a, b = u[0] * slope, u[1] * slope
    return _pad(np.minimum(a, b), np.maximum(a, b))


def _kernel_form_a(u, tx):
    tux = _linear(u, tx)
    pu = _linear(u, PI)
    ratio = _div_pos(_sinc(tux), _sinc(pu))
    coef = tx / PI
    inner = _add(_cos(tux), _mul(_cos(pu), _mul(ratio, (coef, coef))))
    one_minus_u = _pad(1.0 - u[1], 1.0 - u[0])
    return _add(_mul(one_minus_u, inner), _scale(_sin(tux), 1.0 / PI))


def _kernel_form_b(u, tx):
    tux = _linear(u, tx)
    pu = _linear(u, PI)
    rest = _linear(_pad(1.0 - u[1], 1.0 - u[0]), PI)
    denom = _scale(_sinc(rest), PI)
    return _add(_div_pos(_sin(_add(pu, tux)), denom), _scale(_sin(tux), 1.0 / PI))


def _g_upper(v_lo, v_hi, a):
    """Upper bound of ``g(v, a)`` over ``v`` in ``[v_lo, v_hi]``.

    On the first branch ``g = exp(-v^2/2) * (-expm1(psi))`` with
    ``psi = (log cos(av) + (av)^2/2) / a^2``; both factors are monotone.
    """
    v_lo = np.asarray(v_lo, dtype=float)
    v_hi = np.asarray(v_hi, dtype=float)
    a = np.asarray(a, dtype=float)
    gauss_hi = np.exp(-0.5 * v_lo * v_lo) * (1 + _REL)
    z = a * v_hi * (1 + _REL)
    first = z <= HALF_PI
    zc = np.where(first, z, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        half_sin = np.sin(0.5 * zc)
        log_cos = np.log1p(-2.0 * half_sin * half_sin)
        psi = (log_cos + 0.5 * zc * zc) / (a * a)
        # psi <= 0; absolute error of the sum is a few ulps of z^2.
        psi_lo = psi - (np.abs(log_cos) + 0.5 * zc * zc) * 4 * _REL / (a * a) - _ABS
        branch1 = gauss_hi * (-np.expm1(psi_lo)) * (1 + _REL)
    branch1 = np.where(first, branch1, -np.inf)
    crosses = a * v_hi * (1 + _REL) > HALF_PI
    branch2 = np.where(crosses, gauss_hi + 1.0, -np.inf)
    return np.maximum(np.maximum(branch1, branch2), 0.0)


def _h_upper(v_lo, v_hi, a, theta: ThetaConstant = _THETA):
    """Upper bound of ``h(v, a)`` over ``v`` in ``[v_lo, v_hi]``.

    Where ``a*v`` may fall on either side of the uncertain ``theta`` both
    branches are admitted.
    """
    v_lo = np.asarray(v_lo, dtype=float)
    v_hi = np.asarray(v_hi, dtype=float)
    a = np.asarray(a, dtype=float)
    z_lo = a * v_lo * (1 - _REL)
    z_hi = a * v_hi * (1 + _REL)
    out = np.full(np.broadcast(v_lo, v_hi, a).shape, -np.inf)
    gauss = np.exp(-0.5 * v_lo * v_lo) * (1 + _REL)
    out = np.where(z_lo <= theta.hi, np.maximum(out, gauss), out)
    middle = (z_hi >= theta.lo) & (z_lo <= PI)
    zc = np.clip(np.minimum(z_hi, PI), theta.lo, PI)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg_cos = -np.cos(zc)
        power = np.exp(np.log(np.where(neg_cos > 0, neg_cos, 1.0)) / (a * a) * (1 - _REL)) * (1 + _REL)
    out = np.where(middle, np.maximum(out, np.minimum(power, 1.0)), out)
    out = np.where(z_hi > PI, np.maximum(out, 1.0), out)
    return out


# ---------------------------------------------------------------------------
# Point evaluations (plain floats; used for inspection and tests).


def kernel_k(u: float, x: float, T: float) -> float:
    """``k(u,x,T) = (1-u) sin(pi u + Tux)/sin(pi u) + sin(Tux)/pi`` with its limits at 0 and 1."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if u == 0.0:
        return 1.0 + T * x / PI
    if u == 1.0:
        return 0.0
    tux = T * u * x
    return (1.0 - u) * math.sin(PI * u + tux) / math.sin(PI * u) + math.sin(tux) / PI


def envelope_g(v: float, a: float) -> float:
    if not a > 0:
        raise ValueError("a must be positive")
    if a * v <= HALF_PI:
        return math.exp(-v * v / 2) - math.cos(a * v) ** (1.0 / (a * a))
    return math.exp(-v * v / 2) + 1.0


def envelope_h(v: float, a: float, theta: ThetaConstant = _THETA) -> float:
    """``h(v, a)``, taking the larger branch wherever ``a*v`` lies inside the theta bracket."""
    if not a > 0:
        raise ValueError("a must be positive")
    z = a * v
    if z > PI:
        return 1.0
    candidates = []
    if z <= theta.hi:
        candidates.append(math.exp(-v * v / 2))
    if z >= theta.lo:
        neg_cos = -math.cos(z)
        candidates.append(math.exp(math.log(neg_cos) / (a * a)) if neg_cos > 0 else 0.0)
    return max(candidates)


# ---------------------------------------------------------------------------
# The bound itself.


def _panels(start: float, stop: float, m: int):
    edges = np.linspace(start, stop, m + 1)
    lo, hi = edges[:-1], edges[1:]
    # linspace edges are not exact; widen each panel by an ulp so the panels cover [start, stop].
    lo = np.nextafter(lo, -np.inf)
    hi = np.nextafter(hi, np.inf)
    lo[0], hi[-1] = start, stop
    width = (stop - start) / m * (1 + _REL)
    return np.maximum(lo, 0.0), np.minimum(hi, 1.0), width


def _sum_upper(terms: np.ndarray, axis=-1) -> np.ndarray:
    """Upper bound for a float sum of non-negative-or-signed terms."""
    n = terms.shape[axis]
    s = terms.sum(axis=axis)
    mag = np.abs(terms).sum(axis=axis)
    return s + mag * (n + 2) * np.finfo(float).eps + _ABS


def prawitz_grid(a_values: Sequence[float], x_values: Sequence[float], params: PrawitzParams) -> np.ndarray:
    """Certified lower bounds on ``F(a, x, T, q)`` for every pair; shape ``(len(a), len(x))``.

    The ``a`` and ``x`` dependences separate, so the ``|k| * g`` and
    ``|k| * h`` integrals reduce to matrix products of per-panel suprema.
    """
    a = np.atleast_1d(np.asarray(a_values, dtype=float))
    x = np.atleast_1d(np.asarray(x_values, dtype=float))
    if np.any(a <= 0):
        raise ValueError("a must be positive")
    T, q, m = float(params.T), float(params.q), int(params.subdivisions)
    total = np.full((a.size, x.size), 0.5)
    eps_mat = 4 * m * np.finfo(float).eps

    if q > 0:
        lo, hi, w = _panels(0.0, q, m)
        k_lo, k_hi = _kernel_interval(lo[None, :], hi[None, :], x[:, None], T)
        kabs = np.maximum(np.abs(k_lo), np.abs(k_hi))
        g = _g_upper(T * lo[None, :], T * hi[None, :], a[:, None])
        i_g = (g @ kabs.T) * (1 + eps_mat) * w
        e_lo, e_hi = _exp_neg_half_sq((T * lo, T * hi))
        ke_hi = _mul((k_lo, k_hi), (e_lo[None, :], e_hi[None, :]))[1]
        i_e = _sum_upper(ke_hi) * w
        i_e = np.where(i_e >= 0, i_e * (1 + _REL), i_e * (1 - _REL))
        total = total - i_g - i_e[None, :]
    if q < 1:
        lo, hi, w = _panels(q, 1.0, m)
        k_lo, k_hi = _kernel_interval(lo[None, :], hi[None, :], x[:, None], T)
        kabs = np.maximum(np.abs(k_lo), np.abs(k_hi))
        h = _h_upper(T * lo[None, :], T * hi[None, :], a[:, None])
        i_h = (h @ kabs.T) * (1 + eps_mat) * w
        total = total - i_h
    # Round the final subtraction toward smaller values.
    return np.nextafter(np.nextafter(total, -np.inf), -np.inf)


def prawitz_lower_bound(a: float, x: float, params: PrawitzParams) -> float:
    """A value certified to be at most ``F(a, x, T, q)``; may be negative."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    return float(prawitz_grid([a], [x], params)[0, 0])


def default_T_grid(x: float) -> list:
    return [t * (1.0 + abs(x)) for t in range(1, 9)]


def default_q_grid() -> list:
    return [round(0.05 * i, 2) for i in range(1, 20)]


def best_prawitz(a: float, x: float, T_grid=None, q_grid=None, subdivisions: int = 1024):
    """Maximize the certified bound over a ``(T, q)`` grid; returns ``(value, T, q)``."""
    T_grid = default_T_grid(x) if T_grid is None else list(T_grid)
    q_grid = default_q_grid() if q_grid is None else list(q_grid)
    if not T_grid or not q_grid:
        raise ValueError("T and q grids must be non-empty")
    best = (-math.inf, None, None)
    for T in T_grid:
        for q in q_grid:
            v = prawitz_lower_bound(a, x, PrawitzParams(T, q, subdivisions))
            if v > best[0]:
                best = (v, T, q)
    value = min(max(best[0], 0.0), 1.0)
    return value, best[1], best[2]


def optimize_prawitz(a: float, x: float, T_grid=None, q_grid=None, M: int = 1024) -> float:
    """Best certified bound over the grid, clamped to ``[0, 1]``."""
    return best_prawitz(a, x, T_grid, q_grid, M)[0]
