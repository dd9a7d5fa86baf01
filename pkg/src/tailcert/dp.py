"""Grid of certified lower bounds on the constrained tail infimum.

``D[j, i]`` bounds ``inf P(X >= x_i)`` over unit-variance Rademacher sums
whose largest weight is at most ``a_j``, where ``a_j = (j+1)*beta`` and
``x_i = x_min + i*beta``.  The table starts from the Prawitz bound and is
improved by eliminating the largest weight, one pass at a time.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ChecksumError, ResourceLimitError, TableVersionError, UnsupportedInputError
from .exact import Surd, parse_exact
from .prawitz import PrawitzParams, prawitz_grid

DESK_BETA = Fraction(1, 200)
DESK_ITERATIONS = 50
PAPER_BETA = Fraction(1, 2000)
PAPER_ITERATIONS = 1000
DEFAULT_MEMORY_BUDGET = 2 << 30

# Absolute (T, q) pairs tried when filling the initial table.  The useful T
# grows roughly like 3/a, so the range reaches far past 8.
TABLE_T_GRID = (1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0)
TABLE_Q_GRID = (0.05, 0.1, 0.15, 0.25, 0.4, 0.6)

_MAGIC = b"TCDPGRID"
_VERSION = 1
_HEADER = struct.Struct("<8sIqQqQqQII I32s")


def _exact(v) -> Fraction | Surd:
    if isinstance(v, Surd):
        return v.as_fraction() if v.is_rational else v
    if isinstance(v, bool):
        raise UnsupportedInputError("booleans are not numbers here")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise UnsupportedInputError(f"non-finite value {v!r}")
        return Fraction(v)
    if isinstance(v, str):
        return _exact(parse_exact(v))
    raise UnsupportedInputError(f"cannot interpret {v!r} as an exact number")


def _ceil_div(v, beta: Fraction) -> int:
    """``ceil(v / beta)`` computed exactly."""
    return math.ceil(v / beta)


def _float_at_least(v: Fraction) -> float:
    f = float(v)
    return f if Fraction(f) >= v else float(np.nextafter(f, math.inf))


@dataclass(eq=False)
class DPGrid:
    beta: Fraction
    x_min: Fraction
    x_max: Fraction
    values: np.ndarray
    iterations_done: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.beta = Fraction(self.beta)
        self.x_min = Fraction(self.x_min)
        self.x_max = Fraction(self.x_max)
        if self.beta <= 0:
            raise UnsupportedInputError("beta must be positive")
        if (1 / self.beta).denominator != 1:
            raise UnsupportedInputError("1/beta must be an integer so that a = 1 is a grid point")
        for v in (self.x_min, self.x_max):
            if (v / self.beta).denominator != 1:
                raise UnsupportedInputError("x range endpoints must be multiples of beta")
        if self.x_max <= self.x_min:
            raise UnsupportedInputError("empty x range")
        shape = (self.a_points, self.x_points)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != shape:
            raise UnsupportedInputError(f"values must have shape {shape}, got {self.values.shape}")

    @property
    def a_points(self) -> int:
        return int(1 / self.beta)

    @property
    def x_points(self) -> int:
        return int((self.x_max - self.x_min) / self.beta) + 1

    @property
    def m0(self) -> int:
        return int(self.x_min / self.beta)

    def a_value(self, j: int) -> Fraction:
        return (j + 1) * self.beta

    def x_value(self, i: int) -> Fraction:
        return (self.m0 + i) * self.beta

    def a_grid(self) -> list:
        return [self.a_value(j) for j in range(self.a_points)]

    def x_grid(self) -> list:
        return [self.x_value(i) for i in range(self.x_points)]

    def __eq__(self, other):
        if not isinstance(other, DPGrid):
            return NotImplemented
        return (self.beta == other.beta and self.x_min == other.x_min and self.x_max == other.x_max
                and self.iterations_done == other.iterations_done
                and self.values.tobytes() == other.values.tobytes())

    def copy(self) -> "DPGrid":
        return DPGrid(self.beta, self.x_min, self.x_max, self.values.copy(), self.iterations_done, list(self.history))


def _check_budget(beta: Fraction, x_min: Fraction, x_max: Fraction, budget: int):
    cells = int(1 / beta) * (int((x_max - x_min) / beta) + 1)
    # Building keeps about three tables alive at once.
    need = 3 * 8 * cells
    if need > budget:
        raise ResourceLimitError(f"grid needs about {need} bytes, budget is {budget}")


def elementary_floor(x: Fraction) -> float:
    """A lower bound on ``P(X >= x)`` valid for every unit-variance symmetric sum.

    For ``x <= 0`` symmetry gives ``1/2``; for ``x < 0`` also
    ``1 - P(X > |x|)`` with Hoeffding ``exp(-x^2/2)`` and symmetric Chebyshev
    ``1/(2x^2)`` bounding the upper tail.  Zero for ``x > 0``.
    """
    if x > 0:
        return 0.0
    if x == 0:
        return 0.5
    t = float(-x)
    upper = min(0.5, math.exp(-0.5 * t * t), 0.5 / (t * t))
    return max(0.0, 1.0 - upper - 1e-12)


def build_initial(beta=DESK_BETA, x_min=-3, x_max=3, T_grid=TABLE_T_GRID, q_grid=TABLE_Q_GRID,
                  subdivisions: int = 256, memory_budget: int = DEFAULT_MEMORY_BUDGET,
                  floors: bool = True) -> DPGrid:
    """Fill ``D_0`` with the best certified Prawitz bound over the ``(T, q)`` grid.

    With ``floors`` the entries for ``x <= 0`` are also raised to
    :func:`elementary_floor`.
    """
    beta, x_min, x_max = Fraction(beta), Fraction(x_min), Fraction(x_max)
    if beta <= 0:
        raise UnsupportedInputError("beta must be positive")
    _check_budget(beta, x_min, x_max, memory_budget)
    na = int(1 / beta)
    m0 = x_min / beta
    nx = int((x_max - x_min) / beta) + 1
    # Evaluate at points no smaller than the exact grid points; larger a and x
    # only weaken the bound, so it still holds at the grid point.
    a_f = np.array([_float_at_least((j + 1) * beta) for j in range(na)])
    x_f = np.array([_float_at_least((m0 + i) * beta) for i in range(nx)])
    best = np.zeros((na, nx))
    for T in T_grid:
        for q in q_grid:
            np.maximum(best, prawitz_grid(a_f, x_f, PrawitzParams(T, q, subdivisions)), out=best)
    if floors:
        floor = np.array([elementary_floor((m0 + i) * beta) for i in range(nx)])
        np.maximum(best, floor[None, :], out=best)
    kernels.monotone_closure(best)
    return DPGrid(beta, x_min, x_max, best, 0)


def _sign_arrays(grid: DPGrid):
    xs = grid.x_grid()
    sm = np.array([(x > 1) - (x < 1) for x in xs], dtype=np.int8)
    sp = np.array([(x > -1) - (x < -1) for x in xs], dtype=np.int8)
    return sm, sp


def refine(grid: DPGrid, iterations: int = 1, epsilon: float = 0.0) -> DPGrid:
    """Apply the elimination recursion ``iterations`` times; returns a new grid.

    Stops early once the largest pointwise gain of a pass is ``<= epsilon``
    (pass a negative epsilon to disable).  The input is not modified.
    """
    if iterations < 0:
        raise UnsupportedInputError("iterations must be non-negative")
    sm, sp = _sign_arrays(grid)
    beta_f = float(grid.beta)
    if Fraction(beta_f) != grid.beta:
        # The kernels place grid points at x_min + i*beta in floating point;
        # their padding absorbs this representation error.
        pass
    x_min_f = float(grid.x_min)
    values = grid.values
    history = list(grid.history)
    done = grid.iterations_done
    for _ in range(iterations):
        new = kernels.refine_pass(values, beta_f, x_min_f, sm, sp)
        kernels.monotone_closure(new)
        gain = float(np.max(new - values))
        values = new
        done += 1
        history.append(gain)
        if gain <= epsilon:
            break
    return DPGrid(grid.beta, grid.x_min, grid.x_max, values, done, history)


def query(grid: DPGrid, a, x) -> float:
    """Certified lower bound on the tail infimum at ``(a, x)``.

    Both arguments are rounded up to the grid exactly (floats are taken at
    their exact binary value, strings and surds are supported).
    """
    a, x = _exact(a), _exact(x)
    if a <= 0:
        raise UnsupportedInputError("a must be positive")
    if a > 1:
        raise UnsupportedInputError("a must not exceed 1")
    j = _ceil_div(a, grid.beta) - 1
    i = _ceil_div(x, grid.beta) - grid.m0
    if i > grid.x_points - 1:
        return 0.0
    return float(grid.values[j, max(i, 0)])


def persist(grid: DPGrid, path) -> None:
    """Write the table: fixed header, SHA-256 of header fields and data, float64 values."""
    data = np.ascontiguousarray(grid.values, dtype="<f8").tobytes()
    fields = (_VERSION, grid.beta.numerator, grid.beta.denominator, grid.x_min.numerator, grid.x_min.denominator,
              grid.x_max.numerator, grid.x_max.denominator, grid.iterations_done, grid.a_points, grid.x_points)
    digest = hashlib.sha256(repr(fields).encode() + data).digest()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, *fields, digest))
        fh.write(data)


def load(path, expect_beta=None) -> DPGrid:
    """Read a table written by :func:`persist`, verifying version and checksum."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ChecksumError("file shorter than its header")
    magic, *fields, digest = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise TableVersionError("not a table file")
    if fields[0] != _VERSION:
        raise TableVersionError(f"table format version {fields[0]}, expected {_VERSION}")
    _, bn, bd, xn, xd, yn, yd, iters, na, nx = fields
    data = raw[_HEADER.size:]
    if len(data) != 8 * na * nx or hashlib.sha256(repr(tuple(fields)).encode() + data).digest() != digest:
        raise ChecksumError("table checksum mismatch")
    beta = Fraction(bn, bd)
    if expect_beta is not None and Fraction(expect_beta) != beta:
        raise TableVersionError(f"table has beta={beta}, requested beta={Fraction(expect_beta)}")
    values = np.frombuffer(data, dtype="<f8").reshape(na, nx).astype(np.float64)
    return DPGrid(beta, Fraction(xn, xd), Fraction(yn, yd), values, iters)


def build_table(beta=DESK_BETA, iterations: int = DESK_ITERATIONS, epsilon: float = 0.0, **kw) -> DPGrid:
    """Initial table followed by ``iterations`` refinement passes."""
    return refine(build_initial(beta, **kw), iterations, epsilon)
