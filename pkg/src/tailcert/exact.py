"""Exact distribution oracle for finite Rademacher sums.

Everything here works over the rationals.  Thresholds that involve a single
square root (``1/sqrt(7)``, ``2/sqrt(6)``, ``y * sqrt(Var X)``) are carried as
:class:`Surd` values, which compare exactly against rationals.
"""
from __future__ import annotations

import math
import re
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from itertools import product
from numbers import Rational
from typing import Iterable, Sequence, Union

from .errors import ResourceLimitError, UnsupportedInputError

DEFAULT_ENUMERATION_CAP = 24
MITM_ABOVE = 20


@total_ordering
@dataclass(frozen=True)
class Surd:
    """The real number ``sign * sqrt(square)`` with ``square`` rational."""

    sign: int
    square: Fraction

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")
        sq = Fraction(self.square)
        if sq < 0:
            raise ValueError("square must be non-negative")
        if sq == 0:
            object.__setattr__(self, "sign", 0)
        if self.sign == 0:
            sq = Fraction(0)
        object.__setattr__(self, "square", sq)

    @classmethod
    def sqrt(cls, q) -> "Surd":
        return cls(1, Fraction(q))

    @classmethod
    def of(cls, value) -> "Surd":
        if isinstance(value, Surd):
            return value
        if isinstance(value, (int, Rational)):
            r = Fraction(value)
            return cls((r > 0) - (r < 0), r * r)
        raise UnsupportedInputError(f"cannot represent {value!r} exactly")

    @property
    def is_rational(self) -> bool:
        return _rational_sqrt(self.square) is not None

    def as_fraction(self) -> Fraction:
        root = _rational_sqrt(self.square)
        if root is None:
            raise ValueError(f"{self} is irrational")
        return self.sign * root

    def __neg__(self):
        return Surd(-self.sign, self.square)

    def __abs__(self):
        return Surd(abs(self.sign), self.square)

    def __mul__(self, other):
        if isinstance(other, Surd):
            return Surd(self.sign * other.sign, self.square * other.square)
        if isinstance(other, (int, Rational)):
            return self * Surd.of(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Surd.of(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by zero surd")
        return Surd(self.sign * other.sign, self.square / other.square)

    def __rtruediv__(self, other):
        return Surd.of(other) / self

    def __float__(self):
        return self.sign * math.sqrt(self.square)

    def __floor__(self):
        if self.sign >= 0:
            return math.isqrt(math.floor(self.square))
        return -_ceil_sqrt(self.square)

    def __ceil__(self):
        if self.sign >= 0:
            return _ceil_sqrt(self.square)
        return -math.isqrt(math.floor(self.square))

    def _key(self, other):
        try:
            return Surd.of(other)
        except UnsupportedInputError:
            return None

    def __eq__(self, other):
        o = self._key(other)
        if o is None:
            return NotImplemented
        return self.sign == o.sign and self.square == o.square

    def __lt__(self, other):
        o = self._key(other)
        if o is None:
            return NotImplemented
        if self.sign != o.sign:
            return self.sign < o.sign
        if self.sign >= 0:
            return self.square < o.square
        return self.square > o.square

    def __hash__(self):
        return hash((self.sign, self.square))

    def __str__(self):
        root = _rational_sqrt(self.square)
        if root is not None:
            return str(self.sign * root)
        prefix = "-" if self.sign < 0 else ""
        return f"{prefix}sqrt({self.square})"


Exact = Union[int, Fraction, Surd]


def _rational_sqrt(q: Fraction):
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _ceil_sqrt(q: Fraction) -> int:
    m = math.isqrt(math.floor(q))
    return m if m * m == q else m + 1


_NUMBER = r"[+-]?\d+(?:\.\d+)?(?:/\d+)?"
_SURD_RE = re.compile(
    rf"^\s*(?:(?P<coef>{_NUMBER})\s*(?P<op>[*/])\s*)?sqrt\s*\(?\s*(?P<rad>{_NUMBER})\s*\)?\s*$"
)


def parse_exact(text: str) -> Exact:
    """Parse ``"3/4"``, ``"0.95"``, ``"sqrt(6)"``, ``"2/sqrt(6)"``, ``"-1*sqrt(2)"``."""
    text = text.strip()
    m = _SURD_RE.match(text)
    if m:
        root = Surd.sqrt(Fraction(m.group("rad")))
        if m.group("coef") is None:
            return root
        coef = Fraction(m.group("coef"))
        return coef * root if m.group("op") == "*" else coef / root
    neg = text.startswith("-")
    body = text[1:] if neg else text
    if body.startswith("sqrt"):
        value = parse_exact(body)
        return -value if neg else value
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UnsupportedInputError(f"cannot parse exact number {text!r}") from exc


def to_exact(value) -> Exact:
    if isinstance(value, bool):
        raise UnsupportedInputError("booleans are not weights")
    if isinstance(value, Surd):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_exact(value)
    raise UnsupportedInputError(
        f"{value!r} ({type(value).__name__}) is not an exact rational; pass a Fraction or 'num/den' string"
    )


def _to_fraction(value) -> Fraction:
    v = to_exact(value)
    if isinstance(v, Surd):
        if not v.is_rational:
            raise UnsupportedInputError(f"weight {v} is irrational")
        return v.as_fraction()
    return v


@dataclass(frozen=True)
class WeightVector:
    """Positive weights ``a_1 >= ... >= a_n > 0`` stored as exact rationals."""

    weights: tuple

    def __post_init__(self):
        ws = tuple(_to_fraction(w) for w in self.weights)
        if not ws:
            raise ValueError("a weight vector needs at least one weight")
        if any(w <= 0 for w in ws):
            raise ValueError("weights must be strictly positive")
        if any(ws[i] < ws[i + 1] for i in range(len(ws) - 1)):
            raise ValueError("weights must be non-increasing")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def of(cls, values: Iterable) -> "WeightVector":
        """Build from any iterable of exact values, sorting into non-increasing order."""
        return cls(tuple(sorted((_to_fraction(v) for v in values), reverse=True)))

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        if not parts:
            raise UnsupportedInputError("empty weight list")
        values = []
        for pos, part in enumerate(parts, 1):
            try:
                values.append(_to_fraction(part))
            except UnsupportedInputError as exc:
                raise UnsupportedInputError(f"weight #{pos} ({part!r}): {exc}") from None
        return cls.of(values)

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def variance(self) -> Fraction:
        return sum((w * w for w in self.weights), Fraction(0))

    @property
    def is_normalized(self) -> bool:
        return self.variance == 1

    def tail(self, k: int) -> "WeightVector":
        return WeightVector(self.weights[k:])

    def scaled(self, c) -> "WeightVector":
        c = _to_fraction(c)
        return WeightVector(tuple(c * w for w in self.weights))

    def __str__(self):
        return ",".join(str(w) for w in self.weights)


@dataclass(frozen=True)
class TailProbability:
    value: Fraction
    strict: bool = False
    two_sided: bool = False

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return str(self.value)


def _integer_weights(weights: Sequence[Fraction]):
    scale = math.lcm(*(w.denominator for w in weights))
    return tuple(int(w * scale) for w in weights), scale


@lru_cache(maxsize=256)
def _sum_distribution(ints: tuple):
    """Sorted distinct sums of ``sum(z_i * w_i)`` with their multiplicities."""
    dist = {0: 1}
    for w in ints:
        nxt = {}
        for s, c in dist.items():
            nxt[s + w] = nxt.get(s + w, 0) + c
            nxt[s - w] = nxt.get(s - w, 0) + c
        dist = nxt
    values = sorted(dist)
    counts = [dist[v] for v in values]
    suffix = [0] * (len(values) + 1)
    for i in range(len(values) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + counts[i]
    return values, suffix


def _count_at_least(ints: tuple, m: int) -> int:
    """Number of sign patterns with integer sum ``>= m``."""
    if len(ints) <= MITM_ABOVE:
        values, suffix = _sum_distribution(ints)
        return suffix[bisect_left(values, m)]
    half = len(ints) // 2
    left_values, left_suffix = _sum_distribution(ints[:half])
    right_values, right_suffix = _sum_distribution(ints[half:])
    total = 0
    for i, u in enumerate(left_values):
        mult = left_suffix[i] - left_suffix[i + 1]
        total += mult * right_suffix[bisect_left(right_values, m - u)]
    return total


def tail_probability(
    w: WeightVector,
    x,
    strict: bool = False,
    two_sided: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> TailProbability:
    """Exact ``P(X >= x)`` for ``X = sum w_i eps_i``.

    ``strict`` gives ``P(X > x)``; ``two_sided`` replaces ``X`` by ``|X|``.
    ``x`` is in the same units as the weights and may be a :class:`Surd`.
    """
    if not isinstance(w, WeightVector):
        w = WeightVector.of(w)
    if w.n > cap:
        raise ResourceLimitError(f"n={w.n} exceeds the enumeration cap {cap}")
    x = Surd.of(to_exact(x))
    ints, scale = _integer_weights(w.weights)
    xs = x * scale
    total = 1 << w.n

    def at_least(t: Surd, strict_: bool) -> int:
        cut = math.floor(t) + 1 if strict_ else math.ceil(t)
        return _count_at_least(ints, cut)

    if not two_sided:
        count = at_least(xs, strict)
    elif xs.sign < 0 or (xs.sign == 0 and not strict):
        count = total
    else:
        count = 2 * at_least(xs, strict)
    return TailProbability(Fraction(count, total), strict, two_sided)


def standardized_tail(
    w: WeightVector, y, strict: bool = False, two_sided: bool = False, cap: int = DEFAULT_ENUMERATION_CAP
) -> TailProbability:
    """``P(X >= y * sqrt(Var X))`` for possibly unnormalized rational weights."""
    if not isinstance(w, WeightVector):
        w = WeightVector.of(w)
    y = Surd.of(to_exact(y))
    x = y * Surd.sqrt(w.variance)
    return tail_probability(w, x, strict=strict, two_sided=two_sided, cap=cap)


def eliminate(w: WeightVector, k: int, s) -> list:
    """Residual thresholds ``s - sum_{i<=k} a_i z_i`` over all ``z`` in ``{-1,+1}^k``.

    ``P(X >= s) = 2^-k * sum(P(Z_k >= r) for r in result)`` where ``Z_k`` is the
    sum over the remaining weights.
    """
    if not 1 <= k <= w.n:
        raise ValueError(f"k={k} out of range 1..{w.n}")
    s = _to_fraction(s)
    head = w.weights[:k]
    return sorted(s - sum(z * a for z, a in zip(signs, head)) for signs in product((-1, 1), repeat=k))


def erdos_anticoncentration_bound(t: int, k: int) -> Fraction:
    """Sum of the ``k`` largest binomial coefficients ``C(t, i)``, over ``2^t``."""
    if not 0 < k <= t:
        raise ValueError(f"need 0 < k <= t, got k={k}, t={t}")
    coeffs = sorted((math.comb(t, i) for i in range(t + 1)), reverse=True)
    return Fraction(sum(coeffs[:k]), 1 << t)


# (t, k): the top t weights, the smallest k of which are summed.
STRUCTURAL_KINDS = {
    "a1+a2": (2, 2),
    "a3+a4+a5": (5, 3),
    "a1-threshold": (1, 1),
    "a1+a2-threshold": (2, 2),
}


@dataclass(frozen=True)
class StructuralCertificate:
    kind: str
    indices: tuple  # 1-based weight indices of the constrained sum
    bound: Exact
    witness: Fraction  # f(k, t) / 2^t
    implied_probability: Fraction  # P(X >= bound) forced when the sum reaches the bound
    target: Fraction
    certified: bool
    satisfied_by_w: object = None  # None when no vector was supplied

    @property
    def statement(self) -> str:
        lhs = "+".join(f"a{i}" for i in self.indices)
        return f"{lhs} < {self.bound}" if self.certified else "not provable"

    def __str__(self):
        return self.statement


def check_structural_constraint(w, s, p, kind: str) -> StructuralCertificate:
    """Certify ``a_{t-k+1} + ... + a_t < s`` for any ``X`` with ``P(X >= s) < p``.

    If that sum reached ``s`` the anti-concentration bound would give
    ``P(|X| < s) <= f(k,t)/2^t``, hence ``P(X >= s) >= (1 - f(k,t)/2^t)/2``.
    The constraint is certified when that forced probability is at least ``p``.
    ``w`` may be ``None``; when given it must be normalized and the result also
    records whether ``w`` satisfies the constraint.
    """
    if kind not in STRUCTURAL_KINDS:
        raise ValueError(f"unknown constraint kind {kind!r}; expected one of {sorted(STRUCTURAL_KINDS)}")
    t, k = STRUCTURAL_KINDS[kind]
    s = to_exact(s)
    p = _to_fraction(p)
    witness = erdos_anticoncentration_bound(t, k)
    implied = (1 - witness) / 2
    indices = tuple(range(t - k + 1, t + 1))
    satisfied = None
    if w is not None:
        if not isinstance(w, WeightVector):
            w = WeightVector.of(w)
        if not w.is_normalized:
            raise ValueError("structural constraints are stated for unit-variance weights")
        padded = list(w.weights) + [Fraction(0)] * t
        satisfied = sum(padded[i - 1] for i in indices) < s
    return StructuralCertificate(kind, indices, s, witness, implied, p, implied >= p, satisfied)
