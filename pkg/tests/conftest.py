import itertools
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from tailcert import dp


def brute_tail(weights, x, strict=False, two_sided=False):
    """P(X >= x) by listing every sign pattern; ``x`` is rational or ``(c, r)`` meaning ``c*sqrt(r)``."""
    count = 0
    pats = list(itertools.product((-1, 1), repeat=len(weights)))
    for signs in pats:
        s = sum(z * Fraction(w) for z, w in zip(signs, weights))
        if two_sided:
            s = abs(s)
        cmp = compare(s, x)
        count += cmp > 0 or (cmp == 0 and not strict)
    return Fraction(count, len(pats))


def compare(s: Fraction, x) -> int:
    """Sign of ``s - x`` with ``x`` rational or ``(c, r)`` standing for ``c*sqrt(r)``."""
    if not isinstance(x, tuple):
        x = Fraction(x)
        return (s > x) - (s < x)
    c, r = Fraction(x[0]), Fraction(x[1])
    # s - c*sqrt(r): compare s with t = c*sqrt(r) through signs and squares.
    t_sign = (c > 0) - (c < 0)
    s_sign = (s > 0) - (s < 0)
    if s_sign != t_sign:
        return (s_sign > t_sign) - (s_sign < t_sign)
    d = s * s - c * c * r
    mag = (d > 0) - (d < 0)
    return mag * s_sign if s_sign else 0


def rational_unit_vector(rng, n: int, denom: int = 12):
    """Rational point on the unit sphere via inverse stereographic projection, sorted by magnitude."""
    while True:
        t = [Fraction(int(rng.integers(-denom, denom + 1)), int(rng.integers(1, denom + 1))) for _ in range(n - 1)]
        q = sum((v * v for v in t), Fraction(0))
        w = [2 * v / (1 + q) for v in t] + [(1 - q) / (1 + q)]
        w = sorted((abs(v) for v in w if v != 0), reverse=True)
        if w:
            assert sum(v * v for v in w) == 1
            return w


@pytest.fixture(scope="session")
def desk_table(tmp_path_factory):
    """The desk-preset table, built once per session (or loaded from TAILCERT_TEST_TABLE)."""
    preset = os.environ.get("TAILCERT_TEST_TABLE")
    if preset and os.path.exists(preset):
        grid = dp.load(preset, expect_beta=dp.DESK_BETA)
        grid.build_seconds = None
        return grid
    t0 = time.perf_counter()
    grid = dp.build_table(dp.DESK_BETA, dp.DESK_ITERATIONS)
    grid.build_seconds = time.perf_counter() - t0
    path = tmp_path_factory.mktemp("table") / "desk.tbl"
    dp.persist(grid, path)
    grid.path = str(path)
    return grid


@pytest.fixture(scope="session")
def small_table():
    """A coarse table for fast structural tests."""
    return dp.build_table(Fraction(1, 50), 10, x_min=-2, x_max=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion; the line is written even if the test fails."""
    state = {"label": request.node.name, "detail": "", "ok": False}

    def report(label, ok, detail=""):
        state.update(label=label, ok=bool(ok), detail=detail)
        return ok

    yield report
    line = f"{'PASS' if state['ok'] else 'FAIL'}  {state['label']}: {state['detail']}"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
