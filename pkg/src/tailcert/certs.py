"""Exact checkers for the hand-proved lemma applications.

Each checker recomputes counts and probabilities by enumerating sign
patterns, and verifies quadratic threshold claims by exact root comparison.
Weights that are all rational multiples of a common surd (``1/sqrt(7)``, ...)
are handled by factoring out that unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CertificateError, UnsupportedInputError
from .exact import Surd, to_exact

LARGE_VARIANCE_CONSTANT = Fraction(817, 100)


def _exact(v):
    if isinstance(v, float):
        return Fraction(v)
    v = to_exact(v)
    if isinstance(v, Surd) and v.is_rational:
        return v.as_fraction()
    return v


def _unit_scale(values: Sequence, extra: Sequence = ()):
    """Write every value as ``unit * rational``; returns ``(unit, rationals, extra_rationals)``."""
    vals = [_exact(v) for v in values]
    unit = next((v for v in reversed(vals) if v != 0), None)
    if unit is None:
        raise UnsupportedInputError("weights must not all be zero")

    def ratio(v):
        v = _exact(v)
        if v == 0:
            return Fraction(0)
        r = Surd.of(v) / Surd.of(unit)
        if not r.is_rational:
            raise UnsupportedInputError(f"{v} is not a rational multiple of {unit}")
        return r.as_fraction()

    return unit, [ratio(v) for v in vals], [ratio(v) for v in extra]


def _sign_matrix(k: int) -> np.ndarray:
    if k > 24:
        raise UnsupportedInputError("enumeration limited to k <= 24")
    idx = np.arange(1 << k, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(k)[None, :]) & 1
    return (2 * bits - 1).astype(np.int64)


def _lattice_values(q: Sequence[Fraction]):
    """Integer-scaled signed sums for every pattern, and the scale."""
    den = 1
    for v in q:
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = np.array([int(v * den) for v in q], dtype=np.int64)
    return _sign_matrix(len(q)) @ ints, den


@dataclass(frozen=True)
class IntervalProbs:
    p_minus1: Fraction
    p0: Fraction
    p1: Fraction
    t: Fraction
    by_r: dict

    def as_tuple(self):
        return (self.p_minus1, self.p0, self.p1, self.t)


def structured_interval_probs(c: Sequence, s, d, gamma=None) -> IntervalProbs:
    """Probabilities that ``sum c_i eps_i`` lies within ``gamma`` of ``s + r*d``.

    ``gamma=None`` means an arbitrarily small positive width, so only exact
    hits count.  A numeric ``gamma`` must be below ``d/2`` and isolate the
    lattice: every signed sum is either exactly some ``s + r*d`` or further
    than ``2*gamma`` from all of them, so that perturbing the weights by a
    total of at most ``gamma`` cannot move mass between intervals.
    """
    unit, q, (su, du) = _unit_scale(c, (s, d))
    if du <= 0:
        raise UnsupportedInputError("d must be positive")
    if gamma is not None:
        gamma = _exact(gamma)
        if not (gamma > 0 and 2 * Surd.of(gamma) < Surd.of(_exact(d))):
            raise CertificateError("need 0 < gamma < d/2")
    vals, den = _lattice_values(q)
    k = len(q)
    counts = {}
    off = {}
    for v in np.unique(vals):
        r = (Fraction(int(v), den) - su) / du
        n = int(np.count_nonzero(vals == v))
        if r.denominator == 1:
            counts[int(r)] = counts.get(int(r), 0) + n
        else:
            off[Fraction(int(v), den)] = n
    if gamma is not None and off:
        # Distance from each off-lattice value to the nearest interval centre, in units.
        gu = Surd.of(gamma) / Surd.of(unit)
        for v in off:
            r = (v - su) / du
            lo = su + (r.numerator // r.denominator) * du
            gap = min(v - lo, lo + du - v)
            if not 2 * gu < gap:
                raise CertificateError(f"gamma too large: signed sum {v}*{unit} lies within 2*gamma of an interval")
    total = 1 << k
    p = {r: Fraction(n, total) for r, n in sorted(counts.items())}
    t = sum((v for r, v in p.items() if r >= 2), Fraction(0))
    return IntervalProbs(p.get(-1, Fraction(0)), p.get(0, Fraction(0)), p.get(1, Fraction(0)), t, p)


@dataclass(frozen=True)
class Quadratic:
    """``lin * D + quad * D^2`` in the perturbation size ``D``."""

    lin: object
    quad: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lin", _exact(self.lin))
        object.__setattr__(self, "quad", Fraction(self.quad))

    def __call__(self, delta: float) -> float:
        return float(self.lin) * delta + float(self.quad) * delta * delta

    def __str__(self):
        return f"{self.lin}*D + {self.quad}*D^2"


def sum_squares_bound(k: int, b, eps):
    """``b^2/k + k*eps^2``, an upper bound on ``sum a_i^2`` when
    ``sum a_i <= b`` and every ``|a_i - b/k| <= eps``.

    ``eps`` may be a number, or a :class:`Quadratic` ``e*D`` (zero quadratic
    part) in which case the result is returned as ``(constant, D^2 coefficient)``.
    """
    if k < 1:
        raise UnsupportedInputError("k must be at least 1")
    b = _exact(b)
    const = Fraction(b * b) / k if not isinstance(b, Surd) else (b * b).as_fraction() / k
    if isinstance(eps, Quadratic):
        if eps.quad != 0:
            raise UnsupportedInputError("eps must be linear in D")
        lin = _exact(eps.lin)
        sq = (Surd.of(lin) * Surd.of(lin)).as_fraction()
        return const, k * sq
    e = _exact(eps)
    sq = (Surd.of(e) * Surd.of(e)).as_fraction()
    return const + k * sq


@dataclass
class LargeVarianceCert:
    s: object
    d: object
    c: tuple
    gamma_coef: Fraction
    var_poly: Quadratic
    delta_max: Fraction
    probs: IntervalProbs
    claimed_threshold: Optional[Fraction] = None
    root: object = None
    bound: Optional[Fraction] = None
    hypotheses_ok: bool = False


def variance_root(var_poly: Quadratic, gamma_coef) -> object:
    """Positive root of ``var_poly(D) - 8.17*(gamma_coef*D)^2``."""
    k = LARGE_VARIANCE_CONSTANT * Fraction(gamma_coef) ** 2 - var_poly.quad
    if k <= 0:
        raise CertificateError("variance condition holds for every D; no threshold")
    if var_poly.lin <= 0:
        raise CertificateError("variance lower bound is not positive for small D")
    return var_poly.lin / k


def _root_le(x: Fraction, root) -> bool:
    return Surd.of(x) <= Surd.of(root)


def large_variance_conclusion(cert: LargeVarianceCert) -> Fraction:
    """``p0/4 + 3*p1/4 + t`` after checking every hypothesis exactly."""
    pr = cert.probs
    if not pr.p_minus1 >= pr.t:
        raise CertificateError(f"hypothesis p_-1 >= t fails: {pr.p_minus1} < {pr.t}")
    if not pr.p0 >= pr.p1:
        raise CertificateError(f"hypothesis p_0 >= p_1 fails: {pr.p0} < {pr.p1}")
    root = variance_root(cert.var_poly, cert.gamma_coef)
    cert.root = root
    if not _root_le(cert.delta_max, root):
        raise CertificateError(f"variance condition fails at D = {cert.delta_max} (root {float(root):.6g})")
    if cert.claimed_threshold is not None:
        if not _root_le(cert.claimed_threshold, root):
            raise CertificateError(f"claimed threshold {cert.claimed_threshold} exceeds the root {float(root):.6g}")
        if not cert.delta_max <= cert.claimed_threshold:
            raise CertificateError(f"perturbation bound {cert.delta_max} exceeds claimed threshold")
    cert.hypotheses_ok = True
    cert.bound = pr.p0 / 4 + 3 * pr.p1 / 4 + pr.t
    return cert.bound


@dataclass(frozen=True)
class SmallSumCert:
    c: tuple
    I: tuple
    lam: tuple
    s: object
    p: Fraction
    delta: Fraction
    S: int
    R: int
    T: int
    d: object
    lhs: Fraction
    rhs: Fraction
    delta_ok: bool
    certified: bool
    shortcut_ok: bool

    @property
    def statement(self) -> str:
        terms = "".join(("+" if l > 0 else "-") + f"a{i}" for i, l in zip(self.I, self.lam)).lstrip("+")
        return f"{terms} < {self.s}" if self.certified else "not certified"


def small_sum_certificate(c: Sequence, I: Sequence[int], lam: Sequence[int], s, p, delta) -> SmallSumCert:
    """Count ``S``, ``R``, ``T`` by enumeration and check the small-sum condition.

    ``I`` holds 1-based indices and ``lam`` their signs.
    """
    I = tuple(int(i) for i in I)
    lam = tuple(int(l) for l in lam)
    if len(I) != len(lam) or any(l not in (-1, 1) for l in lam):
        raise UnsupportedInputError("lam must give a sign for every index in I")
    k = len(c)
    if any(not 1 <= i <= k for i in I):
        raise UnsupportedInputError("indices in I must lie in 1..k")
    unit, q, (su,) = _unit_scale(c, (s,))
    if sum(l * q[i - 1] for i, l in zip(I, lam)) != su:
        raise CertificateError("sum of lam_i c_i over I does not equal s")
    vals, den = _lattice_values(q)
    target = int(su * den)
    signs = _sign_matrix(k)
    in_S = vals == target
    in_T = vals > target
    fixed = np.ones(len(vals), dtype=bool)
    for i, l in zip(I, lam):
        fixed &= signs[:, i - 1] == l
    n_S = int(in_S.sum())
    n_R = int((in_S & fixed).sum())
    n_T = int(in_T.sum())
    if n_T:
        d_units = Fraction(int(vals[in_T].min()) - target, den)
    else:
        d_units = None
    p = Fraction(p)
    delta = _exact(delta)
    lhs = Fraction(min(n_S - n_T, n_R), 2) + n_T
    rhs = (1 << k) * p
    if d_units is None:
        delta_ok = True
        d = None
    else:
        d = _exact(Surd.of(unit) * d_units)
        delta_ok = Surd.of(delta) * k <= Surd.of(d)
    q_min = min(v for v in q if v > 0)
    multiples = all((v / q_min).denominator == 1 for v in q)
    shortcut_ok = multiples and Surd.of(delta) * k <= Surd.of(2 * q_min) * Surd.of(unit)
    return SmallSumCert(tuple(c), I, lam, _exact(s), p, delta, n_S, n_R, n_T, d, lhs, rhs,
                        bool(delta_ok), bool(delta_ok and lhs >= rhs), bool(shortcut_ok))


def dominates(zeta: Sequence[int], base: Sequence[int]) -> bool:
    """Whether ``sum zeta_i a_i >= sum base_i a_i`` for every non-increasing ``a >= 0``.

    By summation by parts this holds iff every prefix sum of ``zeta - base`` is
    non-negative.
    """
    run = 0
    for z, b in zip(zeta, base):
        run += z - b
        if run < 0:
            return False
    return True


@dataclass(frozen=True)
class PairingCert:
    k: int
    size_A: int
    size_B: int
    bound_A: object
    bound_B: object
    s: object
    dominated: bool
    certified: bool
    probability: Fraction


def pairing_certificate(k: int, A_pred: Callable, B_pred: Callable, bound_A, bound_B, s,
                        base_A: Optional[Sequence[int]] = None, base_B: Optional[Sequence[int]] = None) -> PairingCert:
    """Check the pairing argument: ``|A| <= |B|`` and ``bound_A + bound_B >= 2s``.

    ``bound_A`` must bound ``sum zeta_i a_i`` below for every ``zeta`` in ``A``
    (likewise for ``B``).  When the sign patterns ``base_A``/``base_B`` whose
    sums the bounds were proved for are given, every member of the set is
    checked to dominate its base pattern, so the bound transfers to the whole set.
    """
    if k > 24:
        raise UnsupportedInputError("enumeration limited to k <= 24")
    A = [z for z in product((-1, 1), repeat=k) if A_pred(z)]
    B = [z for z in product((-1, 1), repeat=k) if B_pred(z)]
    if set(A) & set(B):
        raise CertificateError("A and B must be disjoint")
    if len(A) > len(B):
        raise CertificateError(f"|A| = {len(A)} > |B| = {len(B)}: no injection A -> B")
    dominated = True
    if base_A is not None:
        dominated &= all(dominates(z, base_A) for z in A)
    if base_B is not None:
        dominated &= all(dominates(z, base_B) for z in B)
    bA, bB, s = _exact(bound_A), _exact(bound_B), _exact(s)
    total = bA + bB
    ok = Surd.of(total) >= 2 * Surd.of(s) if isinstance(s, Surd) else total >= 2 * s
    return PairingCert(k, len(A), len(B), bA, bB, s, dominated, bool(ok and dominated), Fraction(len(A), 1 << k))
