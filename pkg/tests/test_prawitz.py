import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from conftest import rational_unit_vector
from tailcert.dp import TABLE_Q_GRID, TABLE_T_GRID
from tailcert.exact import tail_probability
from tailcert.prawitz import (PrawitzParams, _g_upper, _h_upper, _kernel_interval, best_prawitz, envelope_g,
                              envelope_h, kernel_k, optimize_prawitz, prawitz_grid, prawitz_lower_bound,
                              solve_theta)


def reference_value(a, x, T, q):
    """Plain adaptive quadrature of the smoothed-inversion bound from its pointwise definition."""
    mpmath.mp.dps = 20
    i_g = mpmath.quad(lambda u: abs(kernel_k(float(u), x, T)) * envelope_g(T * float(u), a), [0, q])
    i_e = mpmath.quad(lambda u: kernel_k(float(u), x, T) * math.exp(-(T * float(u)) ** 2 / 2), [0, q])
    i_h = mpmath.quad(lambda u: abs(kernel_k(float(u), x, T)) * envelope_h(T * float(u), a), [q, 1])
    return float(0.5 - i_g - i_e - i_h)


def test_theta_constant():
    th = solve_theta()
    assert abs(th.value - 1.778) < 1e-4
    assert th.lo < th.hi and th.hi - th.lo < 1e-9
    assert math.exp(-th.lo ** 2 / 2) + math.cos(th.lo) > 0
    assert math.exp(-th.hi ** 2 / 2) + math.cos(th.hi) < 0


def test_theta_bad_tolerance():
    with pytest.raises(ValueError):
        solve_theta(0)


def test_params_validation():
    with pytest.raises(ValueError):
        PrawitzParams(0, 0.5)
    with pytest.raises(ValueError):
        PrawitzParams(1, 1.5)
    with pytest.raises(ValueError):
        prawitz_lower_bound(1.5, 0.0, PrawitzParams(4, 0.5))


def test_kernel_limits():
    assert kernel_k(0.0, 0.3, 5.0) == pytest.approx(1 + 5 * 0.3 / math.pi)
    assert kernel_k(1.0, 0.3, 5.0) == 0.0
    assert kernel_k(1e-9, 0.3, 5.0) == pytest.approx(1 + 5 * 0.3 / math.pi, rel=1e-6)


def test_kernel_enclosure_contains_point_values(rng):
    for _ in range(300):
        T = rng.uniform(0.5, 60)
        x = rng.uniform(-3, 3)
        u0 = rng.uniform(0, 1)
        u1 = min(1.0, u0 + rng.uniform(0, 0.02))
        lo, hi = _kernel_interval(np.array([u0]), np.array([u1]), np.array([x]), T)
        for u in np.linspace(u0, u1, 5):
            k = kernel_k(float(u), x, T)
            assert lo[0] - 1e-9 <= k <= hi[0] + 1e-9


def test_envelope_bounds_dominate_point_values(rng):
    for _ in range(300):
        a = rng.uniform(0.01, 1)
        v0 = rng.uniform(0, 8 / a)
        v1 = v0 + rng.uniform(0, 0.05)
        for v in np.linspace(v0, v1, 4):
            assert _g_upper(v0, v1, a) >= envelope_g(float(v), a) - 1e-12
            assert _h_upper(v0, v1, a) >= envelope_h(float(v), a) - 1e-12


@pytest.mark.parametrize("a,x,T,q", [(0.2, 0.5, 12.0, 0.15), (0.1, 1.0, 30.0, 0.1), (0.3, -0.5, 8.0, 0.25),
                                     (0.05, 0.2, 48.0, 0.05)])
def test_certified_value_below_and_close_to_quadrature(a, x, T, q):
    ref = reference_value(a, x, T, q)
    got = prawitz_lower_bound(a, x, PrawitzParams(T, q, 2048))
    assert got <= ref + 1e-9
    assert ref - got < 5e-3


def test_more_panels_tighten():
    coarse = prawitz_lower_bound(0.2, 0.5, PrawitzParams(12.0, 0.15, 64))
    fine = prawitz_lower_bound(0.2, 0.5, PrawitzParams(12.0, 0.15, 1024))
    assert coarse <= fine


def test_grid_matches_pointwise():
    params = PrawitzParams(10.0, 0.2, 128)
    a = [0.1, 0.2, 0.4]
    x = [-1.0, 0.0, 0.7]
    g = prawitz_grid(a, x, params)
    for i, ai in enumerate(a):
        for j, xj in enumerate(x):
            # Matrix products may sum in a different order; both results carry their own rounding allowance.
            assert g[i, j] == pytest.approx(prawitz_lower_bound(ai, xj, params), abs=1e-15)


def test_gaussian_regime_is_informative():
    # Small a behaves like a Gaussian: P(X >= 0.5) is about 0.31.
    v, T, q = best_prawitz(0.05, 0.5, TABLE_T_GRID, TABLE_Q_GRID, subdivisions=256)
    assert 0.25 < v <= 0.3086
    assert optimize_prawitz(0.05, 0.5, TABLE_T_GRID, TABLE_Q_GRID, M=256) == v


def test_below_exact_tail_on_rational_vectors(rng):
    violations = 0
    for _ in range(80):
        w = rational_unit_vector(rng, int(rng.integers(8, 15)), denom=3)
        a = min(1.0, float(w[0]) * (1 + 1e-12))
        x = float(rng.uniform(-1.5, 1.5))
        exact = tail_probability(w, F(x)).value
        for T, q in ((3.0 / a, 0.1), (6.0, 0.25)):
            if prawitz_lower_bound(a, x, PrawitzParams(T, q, 128)) > exact:
                violations += 1
    assert violations == 0
