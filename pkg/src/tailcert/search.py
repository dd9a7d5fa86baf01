"""Branch-and-prune over boxes of leading weights.

A candidate counterexample to ``P(X >= s) >= p`` is described by its first
``k`` weights.  Boxes of such prefixes are discarded when the table proves the
bound for every point in the box (with any tail completion); whatever
survives at depth ``k`` localizes the potential counterexamples.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .dp import DPGrid
from .errors import UnsupportedInputError
from .exact import Surd, parse_exact


def _exact(v):
    if isinstance(v, Surd):
        return v.as_fraction() if v.is_rational else v
    if isinstance(v, str):
        return _exact(parse_exact(v))
    if isinstance(v, bool):
        raise UnsupportedInputError("booleans are not numbers here")
    if isinstance(v, (int, float, Fraction)):
        return Fraction(v)
    raise UnsupportedInputError(f"cannot interpret {v!r} as an exact number")


def float_down(v) -> float:
    """Largest float not exceeding the exact value ``v``."""
    f = float(v)
    return f if Fraction(f) <= v else float(np.nextafter(f, -math.inf))


def float_up(v) -> float:
    """Smallest float not below the exact value ``v``."""
    f = float(v)
    return f if Fraction(f) >= v else float(np.nextafter(f, math.inf))


@dataclass(frozen=True)
class Box:
    """Product of intervals ``[lo_i, hi_i]`` for the first ``r`` weights."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.intervals)
        for lo, hi in iv:
            if not 0 <= lo <= hi <= 1:
                raise UnsupportedInputError(f"bad interval [{lo}, {hi}]")
        object.__setattr__(self, "intervals", iv)

    @property
    def depth(self) -> int:
        return len(self.intervals)

    def lows(self) -> list:
        return [lo for lo, _ in self.intervals]

    def highs(self) -> list:
        return [hi for _, hi in self.intervals]

    def contains(self, weights: Sequence) -> bool:
        """Whether the first ``r`` entries of ``weights`` lie in the box (missing entries count as 0)."""
        w = list(weights) + [0] * max(0, self.depth - len(weights))
        return all(lo <= wi <= hi for (lo, hi), wi in zip(self.intervals, w))

    def __str__(self):
        return " x ".join(f"[{float(lo):.6g}, {float(hi):.6g}]" for lo, hi in self.intervals)


@dataclass(frozen=True)
class LinearConstraint:
    """``sum_i coeffs[i] * a_i < bound`` (or ``<=``), certified elsewhere."""

    coeffs: tuple
    bound: object
    provenance: str
    strict: bool = True

    def __post_init__(self):
        if not self.provenance:
            raise UnsupportedInputError("every constraint needs a provenance tag")
        if any(c not in (-1, 0, 1) for c in self.coeffs):
            raise UnsupportedInputError("coefficients must be -1, 0 or +1")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        object.__setattr__(self, "bound", _exact(self.bound))

    def excludes(self, lows: Sequence, highs: Sequence) -> bool:
        """True when every point of the box violates the constraint."""
        total = Fraction(0)
        for i, c in enumerate(self.coeffs):
            if c > 0:
                total += lows[i]
            elif c < 0:
                total -= highs[i]
        return total >= self.bound if self.strict else total > self.bound


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple = ()

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)


@dataclass
class SearchResult:
    survivors: list
    envelope: Optional[list]
    stats: dict
    conclusive: bool
    d: int

    def envelope_floats(self):
        if self.envelope is None:
            return None
        return [(float(lo), float(hi)) for lo, hi in self.envelope]


@dataclass(frozen=True)
class BoxTest:
    discard: bool
    reason: str
    bound: Fraction = Fraction(0)


def h_max(signs: Sequence[int], box: Box):
    """Largest value of ``sum zeta_i z_i`` over the box, exactly."""
    if len(signs) != box.depth:
        raise UnsupportedInputError("sign pattern length must match box depth")
    total = Fraction(0)
    for z, (lo, hi) in zip(signs, box.intervals):
        if z == 1:
            total += hi
        elif z == -1:
            total -= lo
        else:
            raise UnsupportedInputError("signs must be +1 or -1")
    return total


def _variance_infeasible(lows: Sequence) -> bool:
    return sum(lo * lo for lo in lows) > 1


def _box_bound(table: DPGrid, lo_f: np.ndarray, hi_f: np.ndarray, s_up: float) -> Fraction:
    total = kernels.box_sum(table.values, float(table.beta), float(table.x_min), lo_f, hi_f, s_up)
    return Fraction(total) / (1 << len(lo_f))


def test_box(box: Box, table: DPGrid, s, p) -> BoxTest:
    """Decide whether the table proves ``P(X >= s) >= p`` on the whole box."""
    p = _exact(p)
    if box.depth == 0:
        raise UnsupportedInputError("box must fix at least one weight")
    if _variance_infeasible(box.lows()):
        return BoxTest(True, "variance")
    lo_f = np.array([float_down(v) for v in box.lows()])
    hi_f = np.array([float_up(v) for v in box.highs()])
    bound = _box_bound(table, lo_f, hi_f, float_up(_exact(s)))
    return BoxTest(bound >= p, "table", bound)


@dataclass
class _Context:
    table: DPGrid
    s_up: float
    p: Fraction
    k: int
    d: int
    prior: list
    constraints: tuple
    budget: Optional[int]


class _Budget(Exception):
    pass


class _Walker:
    def __init__(self, ctx: _Context):
        self.ctx = ctx
        self.survivors = []
        self.stats = {"tested": 0, "discarded_table": 0, "discarded_variance": 0,
                      "discarded_constraint": 0, "empty_intersection": 0,
                      "kept_by_depth": [0] * ctx.k}
        self.cells = [(Fraction(m, ctx.d), Fraction(m + 1, ctx.d)) for m in range(ctx.d)]

    def children(self, lows, highs, top_cells=None):
        """Candidate boxes extending the prefix by one coordinate."""
        ctx = self.ctx
        r = len(lows)
        p_lo, p_hi = ctx.prior[r]
        cap = highs[-1] if highs else Fraction(1)
        cells = self.cells if top_cells is None else top_cells
        out = []
        for c_lo, c_hi in cells:
            lo = max(c_lo, p_lo)
            hi = min(c_hi, p_hi, cap)
            if lo > hi:
                self.stats["empty_intersection"] += 1
                continue
            new_lows = [max(v, lo) for v in lows] + [lo]
            if any(a > b for a, b in zip(new_lows, highs)):
                self.stats["empty_intersection"] += 1
                continue
            new_highs = list(highs) + [hi]
            tail_lows = [min(ctx.prior[i][0], hi) for i in range(r + 1, ctx.k)]
            if _variance_infeasible(new_lows + tail_lows):
                self.stats["discarded_variance"] += 1
                continue
            full_lows = new_lows + tail_lows
            full_highs = new_highs + [min(ctx.prior[i][1], hi) for i in range(r + 1, ctx.k)]
            if any(c.excludes(full_lows, full_highs) for c in ctx.constraints):
                self.stats["discarded_constraint"] += 1
                continue
            out.append((new_lows, new_highs))
        return out

    def score(self, lows, highs) -> Fraction:
        ctx = self.ctx
        self.stats["tested"] += 1
        if ctx.budget is not None and self.stats["tested"] > ctx.budget:
            raise _Budget()
        lo_f = np.array([float_down(v) for v in lows])
        hi_f = np.array([float_up(v) for v in highs])
        return _box_bound(ctx.table, lo_f, hi_f, ctx.s_up)

    def expand(self, lows, highs, top_cells=None):
        scored = []
        for nl, nh in self.children(lows, highs, top_cells):
            bound = self.score(nl, nh)
            if bound >= self.ctx.p:
                self.stats["discarded_table"] += 1
            else:
                scored.append((bound, nl, nh))
        # Most dangerous boxes first; ties broken by position for determinism.
        scored.sort(key=lambda t: (t[0], t[1], t[2]))
        for _, nl, nh in scored:
            r = len(nl)
            self.stats["kept_by_depth"][r - 1] += 1
            if r == self.ctx.k:
                self.survivors.append(Box(tuple(zip(nl, nh))))
            else:
                self.expand(nl, nh)


def _normalize_prior(prior, k: int) -> Optional[list]:
    if prior is None:
        prior = [(0, 1)] * k
    prior = [(_exact(lo), _exact(hi)) for lo, hi in prior]
    if len(prior) < k:
        prior += [(Fraction(0), Fraction(1))] * (k - len(prior))
    prior = [(max(Fraction(0), Fraction(lo)), min(Fraction(1), Fraction(hi))) for lo, hi in prior[:k]]
    # Weights are non-increasing: lift lows from later coordinates, cap highs from earlier ones.
    lows = [lo for lo, _ in prior]
    highs = [hi for _, hi in prior]
    for i in range(k - 2, -1, -1):
        lows[i] = max(lows[i], lows[i + 1])
    for i in range(1, k):
        highs[i] = min(highs[i], highs[i - 1])
    if any(lo > hi for lo, hi in zip(lows, highs)):
        return None
    return list(zip(lows, highs))


def _envelope(boxes: list, k: int):
    if not boxes:
        return None
    return [(min(b.intervals[i][0] for b in boxes), max(b.intervals[i][1] for b in boxes)) for i in range(k)]


_WORKER_CTX = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _run_cell(cell):
    walker = _Walker(_WORKER_CTX)
    try:
        walker.expand([], [], [cell])
        ok = True
    except _Budget:
        ok = False
    return walker.survivors, walker.stats, ok


def _merge_stats(parts):
    total = {"tested": 0, "discarded_table": 0, "discarded_variance": 0,
             "discarded_constraint": 0, "empty_intersection": 0}
    kept = None
    for st in parts:
        for key in total:
            total[key] += st[key]
        kept = list(st["kept_by_depth"]) if kept is None else [a + b for a, b in zip(kept, st["kept_by_depth"])]
    total["kept_by_depth"] = kept or []
    return total


def search(table: DPGrid, s, p, k: int, d: int, constraints=(), prior=None,
           budget: Optional[int] = None, workers: int = 1) -> SearchResult:
    """Depth-first branch-and-prune over the first ``k`` weights at resolution ``1/d``.

    ``budget`` caps the number of table tests (per first-coordinate cell when
    ``workers > 1``); exceeding it returns a partial, non-conclusive result.
    """
    if k < 1 or d < 1:
        raise UnsupportedInputError("need k >= 1 and d >= 1")
    p = _exact(p)
    s_up = float_up(_exact(s))
    constraints = tuple(constraints)
    for c in constraints:
        if len(c.coeffs) > k:
            raise UnsupportedInputError("constraint has more coefficients than the search depth")
    norm = _normalize_prior(prior, k)
    stats0 = {"tested": 0, "discarded_table": 0, "discarded_variance": 0, "discarded_constraint": 0,
              "empty_intersection": 0, "kept_by_depth": [0] * k}
    if norm is None:
        return SearchResult([], None, stats0, True, d)
    padded = tuple(LinearConstraint(tuple(c.coeffs) + (0,) * (k - len(c.coeffs)), c.bound, c.provenance, c.strict)
                   for c in constraints)
    ctx = _Context(table, s_up, p, k, d, norm, padded, budget)
    if workers <= 1:
        walker = _Walker(ctx)
        try:
            walker.expand([], [])
            ok = True
        except _Budget:
            ok = False
        survivors, stats = walker.survivors, walker.stats
    else:
        cells = [(Fraction(m, d), Fraction(m + 1, d)) for m in range(d)]
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as pool:
            parts = list(pool.map(_run_cell, cells))
        # Cells are disjoint top-level subtrees; merge them in cell order.
        survivors = [b for part in parts for b in part[0]]
        stats = _merge_stats([part[1] for part in parts])
        ok = all(part[2] for part in parts)
    survivors = sorted(set(survivors), key=lambda b: b.intervals)
    return SearchResult(survivors, _envelope(survivors, k), stats, ok, d)


def feedback_iterate(table: DPGrid, s, p, k: int, d: int, rounds: int, constraints=(), prior=None,
                     budget: Optional[int] = None, workers: int = 1, schedule: Optional[Sequence[int]] = None):
    """Re-run the search with the previous envelope as prior and a finer split.

    ``schedule`` lists ``d`` per round; by default ``d`` doubles each round.
    Returns the final result and the list of per-round results.
    """
    if rounds < 1:
        raise UnsupportedInputError("rounds must be at least 1")
    ds = list(schedule) if schedule is not None else [d * (2 ** i) for i in range(rounds)]
    if len(ds) < rounds:
        raise UnsupportedInputError("schedule shorter than the number of rounds")
    history = []
    current = prior
    result = None
    for i in range(rounds):
        result = search(table, s, p, k, ds[i], constraints, current, budget, workers)
        history.append(result)
        if result.envelope is None or not result.conclusive:
            break
        current = result.envelope
    return result, history
