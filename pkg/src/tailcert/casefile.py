"""Line-oriented case files describing one search run.

Example::

    # potential counterexamples to P(X >= 1/sqrt(7)) >= 1/4
    threshold 1/sqrt(7)
    target 1/4
    depth 7
    grid 10 20 40 80 160
    constraint 1 < 1/sqrt(7) @a1-threshold
    prior 2 0 1/2
    expect-envelope 1 0.33 0.43

``grid`` lists the split count ``d`` for each feedback round; a single value
doubles each round when ``rounds`` asks for more.  ``constraint`` takes
coefficients in ``{-1, 0, 1}`` for the leading weights, ``<`` or ``<=``, the
bound and a provenance tag after ``@``.  Numbers accept ``p/q`` and
``c/sqrt(n)`` forms.
"""
from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import UnsupportedInputError
from .exact import Surd, parse_exact
from .search import LinearConstraint


@dataclass
class CaseSpec:
    threshold: object = None
    target: Optional[Fraction] = None
    depth: Optional[int] = None
    grid: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    prior: dict = field(default_factory=dict)
    expect_envelope: dict = field(default_factory=dict)
    budget: Optional[int] = None
    rounds: Optional[int] = None
    source: str = "<string>"

    def schedule(self) -> list:
        rounds = self.rounds or len(self.grid)
        ds = list(self.grid)
        while len(ds) < rounds:
            ds.append(2 * ds[-1])
        return ds[:rounds]

    def prior_list(self):
        if not self.prior:
            return None
        return [self.prior.get(i, (Fraction(0), Fraction(1))) for i in range(1, self.depth + 1)]


class CaseFileError(UnsupportedInputError):
    pass


def _number(tok: str, where: str):
    try:
        v = parse_exact(tok)
    except UnsupportedInputError as exc:
        raise CaseFileError(f"{where}: {exc}") from None
    if isinstance(v, Surd) and v.is_rational:
        return v.as_fraction()
    return v


def _rational(tok: str, where: str) -> Fraction:
    v = _number(tok, where)
    if isinstance(v, Surd):
        raise CaseFileError(f"{where}: expected a rational number, got {tok!r}")
    return v


def _integer(tok: str, where: str, minimum: int = 1) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise CaseFileError(f"{where}: expected an integer, got {tok!r}") from None
    if v < minimum:
        raise CaseFileError(f"{where}: value must be at least {minimum}")
    return v


def _interval(args, where, depth_hint):
    if len(args) != 3:
        raise CaseFileError(f"{where}: expected 'INDEX LOW HIGH'")
    i = _integer(args[0], where)
    lo, hi = _rational(args[1], where), _rational(args[2], where)
    if lo > hi:
        raise CaseFileError(f"{where}: low exceeds high")
    return i, (lo, hi)


def parse_case(text: str, source: str = "<string>") -> CaseSpec:
    spec = CaseSpec(source=source)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        head, *args = line.split()
        if head == "threshold":
            if len(args) != 1:
                raise CaseFileError(f"{where}: threshold takes one value")
            spec.threshold = _number(args[0], where)
        elif head == "target":
            if len(args) != 1:
                raise CaseFileError(f"{where}: target takes one value")
            spec.target = _rational(args[0], where)
            if not 0 <= spec.target <= 1:
                raise CaseFileError(f"{where}: target must lie in [0, 1]")
        elif head == "depth":
            spec.depth = _integer(args[0] if len(args) == 1 else "", where)
        elif head == "grid":
            if not args:
                raise CaseFileError(f"{where}: grid needs at least one split count")
            spec.grid = [_integer(a, where) for a in args]
        elif head == "budget":
            spec.budget = _integer(args[0] if len(args) == 1 else "", where)
        elif head == "rounds":
            spec.rounds = _integer(args[0] if len(args) == 1 else "", where)
        elif head == "constraint":
            spec.constraints.append(_constraint(line[len("constraint"):], where))
        elif head == "prior":
            i, iv = _interval(args, where, spec.depth)
            spec.prior[i] = iv
        elif head == "expect-envelope":
            i, iv = _interval(args, where, spec.depth)
            spec.expect_envelope[i] = iv
        else:
            raise CaseFileError(f"{where}: unknown directive {head!r}")
    for name in ("threshold", "target", "depth"):
        if getattr(spec, name) is None:
            raise CaseFileError(f"{source}: missing '{name}' directive")
    if not spec.grid:
        raise CaseFileError(f"{source}: missing 'grid' directive")
    for table in (spec.prior, spec.expect_envelope):
        bad = [i for i in table if i > spec.depth]
        if bad:
            raise CaseFileError(f"{source}: coordinate {bad[0]} exceeds depth {spec.depth}")
    for c in spec.constraints:
        if len(c.coeffs) > spec.depth:
            raise CaseFileError(f"{source}: constraint '{c.provenance}' is longer than depth {spec.depth}")
    return spec


def _constraint(body: str, where: str) -> LinearConstraint:
    body, _, prov = body.partition("@")
    prov = prov.strip() or "unspecified"
    toks = shlex.split(body)
    for op, strict in (("<=", False), ("<", True)):
        if op in toks:
            k = toks.index(op)
            break
    else:
        raise CaseFileError(f"{where}: constraint needs '<' or '<='")
    coeffs = []
    for t in toks[:k]:
        if t not in ("-1", "0", "1", "+1"):
            raise CaseFileError(f"{where}: coefficient {t!r} is not -1, 0 or 1")
        coeffs.append(int(t))
    if not coeffs or len(toks) != k + 2:
        raise CaseFileError(f"{where}: expected 'constraint L1 ... Lk < BOUND @provenance'")
    return LinearConstraint(tuple(coeffs), _number(toks[k + 1], where), prov, strict)


def load_case(path) -> CaseSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_case(fh.read(), str(path))


def check_envelope(spec: CaseSpec, envelope) -> list:
    """Return a list of human-readable violations of the expected envelope."""
    problems = []
    for i, (lo, hi) in sorted(spec.expect_envelope.items()):
        if envelope is None:
            continue
        got_lo, got_hi = envelope[i - 1]
        if got_lo < lo or got_hi > hi:
            problems.append(f"a{i} envelope [{float(got_lo):.6g}, {float(got_hi):.6g}] not inside "
                            f"[{float(lo):.6g}, {float(hi):.6g}]")
    return problems
