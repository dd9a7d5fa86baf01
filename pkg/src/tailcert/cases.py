"""Scripted lemma applications for every hard case and plateau theorem.

Each script recomputes the interval probabilities, small-sum counts, pairing
sizes and quadratic thresholds exactly, validates each variance lower-bound
polynomial on sampled admissible perturbations, and compares every number
with its reference value.  Perturbation bounds that came from full-scale
automated runs are recorded as imported steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .certs import (LargeVarianceCert, Quadratic, large_variance_conclusion, pairing_certificate,
                    small_sum_certificate, structured_interval_probs, sum_squares_bound)
from .errors import CertificateError, UnsupportedInputError
from .exact import Surd, check_structural_constraint

F = Fraction
HALF, THIRD, QUARTER = F(1, 2), F(1, 3), F(1, 4)
TOMASZEWSKI_TARGET = F(7, 64)

CASE_IDS = ("A", "B", "C", "D", "E", "F", "G", "H", "sqrt7", "sqrt5", "sqrt3", "2sqrt6")


def inv_sqrt(n: int) -> Surd:
    return Surd(1, F(1, n))


@dataclass
class Step:
    label: str
    expected: str
    computed: str
    verdict: str  # pass | fail | imported | inconclusive
    note: str = ""

    def as_dict(self):
        out = {"label": self.label, "expected": self.expected, "computed": self.computed, "verdict": self.verdict}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class CaseReport:
    case_id: str
    title: str
    steps: list = field(default_factory=list)
    conclusion: Optional[Fraction] = None
    target: Optional[Fraction] = None

    @property
    def verdict(self) -> str:
        v = [s.verdict for s in self.steps]
        if "fail" in v:
            return "fail"
        if "inconclusive" in v:
            return "inconclusive"
        return "pass"

    def add(self, label, expected, computed, ok=None, verdict=None, note=""):
        if verdict is None:
            verdict = "pass" if ok else "fail"
        self.steps.append(Step(label, str(expected), str(computed), verdict, note))

    def as_dict(self):
        return {"case": self.case_id, "title": self.title, "verdict": self.verdict,
                "conclusion": None if self.conclusion is None else str(self.conclusion),
                "target": None if self.target is None else str(self.target),
                "steps": [s.as_dict() for s in self.steps]}

    def text(self) -> str:
        lines = [f"case {self.case_id}: {self.title}  [{self.verdict.upper()}]"]
        for s in self.steps:
            extra = f"  ({s.note})" if s.note else ""
            lines.append(f"  {s.verdict:12s} {s.label}: expected {s.expected}, computed {s.computed}{extra}")
        return "\n".join(lines)


# --- variance polynomial validation ---------------------------------------------------------


def sample_perturbations(centers, delta_lo: float, delta_hi: float, n: int, rng) -> np.ndarray:
    """Random weight prefixes ``c_i + delta_i`` with ``delta_i`` in range, non-increasing."""
    c = np.array([float(v) for v in centers])
    k = len(c)
    grid = np.array([delta_lo, delta_hi, 0.0, delta_lo / 2, delta_lo / 3, delta_hi / 2, delta_hi / 3])
    grid = grid[(grid >= delta_lo) & (grid <= delta_hi)]
    uni = rng.uniform(delta_lo, delta_hi, size=(n, k))
    pick = grid[rng.integers(0, len(grid), size=(n, k))]
    use_grid = rng.random((n, k)) < 0.4
    a = c + np.where(use_grid, pick, uni)
    # Keep weights non-increasing within each block of equal centres.
    start = 0
    for i in range(1, k + 1):
        if i == k or c[i] != c[start]:
            a[:, start:i] = -np.sort(-a[:, start:i], axis=1)
            start = i
    return a


def validate_variance_poly(centers, var_poly: Quadratic, gamma_coef, admissible: Callable, delta_lo: float,
                           delta_hi: float, n: int = 20000, seed: int = 0, sampler: Optional[Callable] = None):
    """Check ``1 - sum a_i^2 >= var_poly(D)`` and ``sum |delta_i| <= gamma_coef*D`` on samples.

    ``sampler(rng, n)`` may replace the default generator when the admissible
    region is too thin for uniform sampling.  Returns ``(ok, samples_used, worst_margin)``.
    """
    rng = np.random.default_rng(seed)
    if sampler is None:
        a = sample_perturbations(centers, delta_lo, delta_hi, n, rng)
    else:
        a = sampler(rng, n)
    c = np.array([float(v) for v in centers])
    a = a[admissible(a, a - c)]
    if len(a) == 0:
        return True, 0, math.inf
    delta = a - c
    D = np.max(np.abs(delta), axis=1)
    var = 1.0 - np.sum(a * a, axis=1)
    margin = var - var_poly(D)
    gamma_ok = np.all(np.sum(np.abs(delta), axis=1) <= float(gamma_coef) * D + 1e-12)
    worst = float(margin.min())
    return bool(worst >= -1e-12 and gamma_ok), int(len(a)), worst


# --- case data -----------------------------------------------------------------------------------


@dataclass
class LVSpec:
    label: str
    centers: list
    s: object
    d: object
    gamma_coef: Fraction
    poly: Quadratic
    delta_max: Fraction
    threshold: Fraction
    probs: tuple
    bound: Fraction
    admissible: Callable
    delta_range: tuple
    sampler: Optional[Callable] = None


def _sum(a, idx):
    return np.sum(a[:, [i - 1 for i in idx]], axis=1)


def _lv(label, centers, s, d, gamma_coef, lin, quad, delta_max, threshold, probs, bound, admissible, signed=False,
        sampler=None):
    dm = float(delta_max)
    rng = (-dm, 0.0) if signed else (-dm, dm)
    return LVSpec(label, centers, s, d, F(gamma_coef), Quadratic(lin, quad), F(delta_max), F(threshold),
                  tuple(F(p) for p in probs), F(bound), admissible, rng, sampler)


def _case_d_sub1(a, dl):
    D = np.max(np.abs(dl), axis=1)
    first = (dl[:, 0] >= 0) & (np.abs(dl[:, 0]) >= D)
    return (_sum(a, range(1, 5)) < 1) & (first | (a[:, 13] <= 0.25 - np.abs(dl[:, 15]) / 2))


def _case_d_sub2(a, dl):
    D = np.max(np.abs(dl), axis=1)
    return (_sum(a, range(1, 5)) < 1) & (a[:, 13] > 0.25 - np.abs(dl[:, 15]) / 2) & (-dl[:, 15] >= D)


def _quarter_block(rng, n, D, lo_frac, hi_frac):
    """Sixteen sorted weights ``1/4 + delta`` with ``delta`` in ``[lo_frac*D, hi_frac*D]``."""
    u = rng.uniform(lo_frac, hi_frac, size=(n, 16))
    ends = rng.random((n, 16)) < 0.3
    u = np.where(ends, np.where(rng.random((n, 16)) < 0.5, lo_frac, hi_frac), u)
    return -np.sort(-(0.25 + u * D[:, None]), axis=1)


def _case_d_sampler1(rng, n):
    D = rng.uniform(0, 45e-5, size=n)
    # Half the draws put the largest deviation on a_1, half keep a_14 low.
    a = _quarter_block(rng, n, D, -1.0, 0.25)
    top = rng.random(n) < 0.5
    a[top, 0] = 0.25 + D[top]
    a[top, 1:4] = np.minimum(a[top, 1:4], 0.25 - D[top, None] / 3 - 1e-15)
    return -np.sort(-a, axis=1)


def _case_d_sampler2(rng, n):
    D = rng.uniform(0, 45e-5, size=n)
    a = _quarter_block(rng, n, D, -0.5, 0.0)
    a[:, 15] = 0.25 - D
    return a


_R7, _R5, _R3, _R6 = inv_sqrt(7), inv_sqrt(5), inv_sqrt(3), inv_sqrt(6)

LARGE_VARIANCE = {
    "B": [_lv("large-variance conclusion", [HALF] * 4, 1, 1, 4, 1, -3, F(5, 1000), F(74, 10000),
              (F(6, 16), F(4, 16), F(1, 16), 0), F(7, 64), lambda a, dl: _sum(a, (1, 2)) < 1)],
    "C": [_lv("large-variance conclusion", [THIRD] * 9, 1, F(2, 3), 9, F(2, 3), F(-21, 4), F(9, 10000),
              F(999, 1000000), (F(63, 256), F(21, 128), F(9, 128), F(5, 256)), F(29, 256),
              lambda a, dl: _sum(a, (1, 2, 3)) < 1)],
    "D": [_lv("large-variance conclusion, subcase 1", [QUARTER] * 16, 1, HALF, 16, 1, F(-11, 2), F(45, 100000),
              F(476, 1000000), (F(715, 4096), F(1001, 8192), F(273, 4096), F(2517, 65536)), F(7795, 65536),
              _case_d_sub1, sampler=_case_d_sampler1),
          _lv("large-variance conclusion, subcase 2", [QUARTER] * 16, 1, HALF, F(21, 2), HALF, -5, F(45, 100000),
              F(5, 10000), (F(715, 4096), F(1001, 8192), F(273, 4096), F(2517, 65536)), F(7795, 65536),
              _case_d_sub2, sampler=_case_d_sampler2)],
    "E": [_lv("large-variance conclusion", [F(2, 3)] + [THIRD] * 5, 1, F(2, 3), 6, F(2, 3), -7, F(2, 1000),
              F(22, 10000), (F(15, 64), F(11, 64), F(5, 64), F(1, 64)), F(15, 128),
              lambda a, dl: (_sum(a, (1, 2)) < 1) & (_sum(a, (3, 4, 5)) < 1))],
    "F": [_lv("large-variance conclusion", [HALF] + [QUARTER] * 12, 1, HALF, 13, HALF, F(-52, 9), F(35, 100000),
              F(36, 100000), (F(1419, 8192), F(253, 2048), F(561, 8192), F(39, 1024)), F(3943, 32768),
              lambda a, dl: (_sum(a, (1, 2, 3)) < 1) & (_sum(a, (2, 3, 4, 5)) < 1))],
    "G": [_lv("large-variance conclusion", [HALF] * 2 + [QUARTER] * 8, 1, HALF, 10, HALF, F(-85, 9),
              F(45, 100000), F(605, 1000000), (F(11, 64), F(127, 1024), F(9, 128), F(39, 1024)), F(499, 4096),
              lambda a, dl: ((_sum(a, (2, 3, 4)) < 1) & (_sum(a, (3, 4, 5, 6)) < 1)
                             & (a[:, 0] - a[:, 1] + _sum(a, (3, 4, 5, 6)) < 1)))],
    "sqrt7": [_lv("large-variance conclusion", [_R7] * 7, _R7, 2 * _R7, 7, 2 * _R7, -1, F(1, 1000),
                  F(188, 100000), (F(35, 128), F(35, 128), F(21, 128), F(8, 128)), F(65, 256),
                  lambda a, dl: a[:, 0] < float(_R7), signed=True)],
    "sqrt5": [_lv("large-variance conclusion, large-sum branch", [_R5] * 5, _R5, 2 * _R5, 5, 2 * _R5, -1,
                  F(25, 10000), F(43, 10000), (F(5, 16), F(5, 16), F(5, 32), F(1, 32)), F(29, 128),
                  lambda a, dl: (a[:, 0] < float(_R5)) & (_sum(a, range(1, 6)) > 2.1), signed=True)],
    "sqrt3": [_lv("large-variance conclusion, large-sum branch", [_R3] * 3, _R3, 2 * _R3, 3, 2 * _R3, -1,
                  F(1, 1000), F(15, 1000), (F(3, 8), F(3, 8), F(1, 8), 0), F(3, 16),
                  lambda a, dl: (a[:, 0] < float(_R3)) & (_sum(a, (1, 2, 3)) > 1.6), signed=True)],
    "2sqrt6": [_lv("large-variance conclusion", [_R6] * 6, 2 * _R6, 2 * _R6, 6, 2 * _R6, -6, F(25, 10000),
                   F(272, 100000), (F(5, 16), F(15, 64), F(3, 32), F(1, 64)), F(37, 256),
                   lambda a, dl: _sum(a, (1, 2)) < 2 * float(_R6))],
}

# (centers, I, lambda, delta, expected (|S|, |R|, |T|), expected condition value, printed reference value)
SMALL_SUMS = {
    "C": [([THIRD] * 9, (1, 2, 3), (1, 1, 1), F(7, 100), (84, 20, 46), F(56), None)],
    "D": [([QUARTER] * 16, (1, 2, 3, 4), (1,) * 4, F(3, 100), (8008, 924, 6885), F(7347), F(7374))],
    "F": [([HALF] + [QUARTER] * 12, (1, 2, 3), (1,) * 3, F(3, 100), (1012, 252, 873), F(1885, 2), None),
          ([HALF] + [QUARTER] * 12, (2, 3, 4, 5), (1,) * 4, F(3, 100), (1012, 112, 873), F(929), None)],
    "G": [([HALF] * 2 + [QUARTER] * 8, (2, 3, 4), (1,) * 3, F(5, 100), (127, 30, 111), F(119), None),
          ([HALF] * 2 + [QUARTER] * 8, (3, 4, 5, 6), (1,) * 4, F(5, 100), (127, 14, 111), F(118), None),
          ([HALF] * 2 + [QUARTER] * 8, (1, 2, 3, 4, 5, 6), (1, -1, 1, 1, 1, 1), F(5, 100), (127, 6, 111), F(114),
           None)],
}

# (kind, threshold, target probability)
STRUCTURAL = {
    "B": [("a1+a2", 1, TOMASZEWSKI_TARGET)],
    "E": [("a1+a2", 1, TOMASZEWSKI_TARGET), ("a3+a4+a5", 1, TOMASZEWSKI_TARGET)],
    "sqrt7": [("a1-threshold", _R7, F(1, 4))],
    "sqrt5": [("a1-threshold", _R5, F(29, 128))],
    "sqrt3": [("a1-threshold", _R3, F(3, 16))],
    "2sqrt6": [("a1+a2-threshold", 2 * _R6, F(1, 8))],
}

# (k, b, label, expected constant, expected D^2 coefficient)
SUM_SQUARES = {
    "B": [(2, 1, "a1^2+a2^2", HALF, 2)],
    "C": [(3, 1, "a1^2+a2^2+a3^2", THIRD, 3)],
    "D": [(4, 1, "a1^2+...+a4^2", QUARTER, 4)],
    "E": [(3, 1, "a3^2+a4^2+a5^2", THIRD, 3)],
    "G": [(2, 1, "a1^2+a2^2", HALF, 2)],
}

# Perturbation bounds obtained by the full-scale automated computation.
IMPORTED_DELTAS = {
    "B": F(5, 1000), "C": F(9, 10000), "D": F(45, 100000), "E": F(2, 1000), "F": F(35, 100000),
    "G": F(45, 100000), "H": F(5, 1000), "sqrt7": F(1, 1000), "sqrt5": F(25, 10000), "sqrt3": F(1, 1000),
    "2sqrt6": F(25, 10000),
}

TITLES = {
    "A": "first weight close to 1", "B": "four weights near 1/2", "C": "nine weights near 1/3",
    "D": "sixteen weights near 1/4", "E": "2/3 followed by five weights near 1/3",
    "F": "1/2 followed by twelve weights near 1/4", "G": "two weights near 1/2 and eight near 1/4",
    "H": "three weights near 1/2 and four near 1/4",
    "sqrt7": "P(|X| >= 1/sqrt(7)) >= 1/2", "sqrt5": "P(|X| >= 1/sqrt(5)) >= 29/64",
    "sqrt3": "P(|X| >= 1/sqrt(3)) >= 3/8", "2sqrt6": "P(|X| >= 2/sqrt(6)) >= 1/4",
}

TARGETS = {c: TOMASZEWSKI_TARGET for c in "ABCDEFGH"}
TARGETS.update({"sqrt7": F(1, 4), "sqrt5": F(29, 128), "sqrt3": F(3, 16), "2sqrt6": F(1, 8)})

# Centre of each hard-case neighbourhood (leading weights).
HARD_POINTS = {
    "A": [F(1)], "B": [HALF] * 4, "C": [THIRD] * 9, "D": [QUARTER] * 16, "E": [F(2, 3)] + [THIRD] * 5,
    "F": [HALF] + [QUARTER] * 12, "G": [HALF] * 2 + [QUARTER] * 8, "H": [HALF] * 3 + [QUARTER] * 4,
}


def _fmt_probs(t):
    return "(" + ", ".join(str(F(v)) for v in t) + ")"


def _run_large_variance(rep: CaseReport, spec: LVSpec, seed: int):
    gamma_num = spec.gamma_coef * spec.delta_max
    try:
        probs = structured_interval_probs(spec.centers, spec.s, spec.d, gamma_num)
    except CertificateError as exc:
        rep.add(f"{spec.label}: interval isolation", "isolated", str(exc), False)
        return None
    rep.add(f"{spec.label}: (p_-1, p_0, p_1, t)", _fmt_probs(spec.probs), _fmt_probs(probs.as_tuple()),
            probs.as_tuple() == spec.probs)
    ok, used, worst = validate_variance_poly(spec.centers, spec.poly, spec.gamma_coef, spec.admissible,
                                             *spec.delta_range, seed=seed, sampler=spec.sampler)
    rep.add(f"{spec.label}: Var(Z) >= {spec.poly} on sampled admissible perturbations",
            "no violation", f"{used} samples, worst margin {worst:.3g}", ok and used > 0)
    cert = LargeVarianceCert(spec.s, spec.d, tuple(spec.centers), spec.gamma_coef, spec.poly, spec.delta_max,
                             probs, spec.threshold)
    try:
        bound = large_variance_conclusion(cert)
    except CertificateError as exc:
        rep.add(f"{spec.label}: hypotheses", "hold", str(exc), False)
        return None
    rep.add(f"{spec.label}: threshold D <= {spec.threshold} below exact root", spec.threshold,
            f"root {float(cert.root):.7g}", True)
    rep.add(f"{spec.label}: bound p_0/4 + 3p_1/4 + t", spec.bound, bound, bound == spec.bound)
    return bound


def _run_small_sums(rep: CaseReport, case_id: str):
    for n, (c, I, lam, delta, counts, value, printed) in enumerate(SMALL_SUMS.get(case_id, []), 1):
        cert = small_sum_certificate(c, I, lam, 1, TOMASZEWSKI_TARGET, delta)
        got = (cert.S, cert.R, cert.T)
        rep.add(f"small-sum claim {n}: (|S|, |R|, |T|) for {cert.statement}", counts, got, got == counts)
        note = ""
        if printed is not None and printed != value:
            note = f"reference value {printed} is a transcription slip; both exceed {cert.rhs}"
        rep.add(f"small-sum claim {n}: min(|S|-|T|,|R|)/2 + |T| >= 2^k p", f"{value} >= {cert.rhs}",
                f"{cert.lhs} >= {cert.rhs}", cert.certified and cert.lhs == value, note=note)
        rep.add(f"small-sum claim {n}: delta <= d/k", f"{delta} <= {cert.d}/{len(c)}", cert.delta_ok,
                cert.delta_ok and cert.shortcut_ok)


def _run_structural(rep: CaseReport, case_id: str):
    for kind, s, p in STRUCTURAL.get(case_id, []):
        sc = check_structural_constraint(None, s, p, kind)
        rep.add(f"structural constraint ({kind})", f"forced probability >= {p}",
                f"{sc.implied_probability} ({sc.statement})", sc.certified)


def _run_sum_squares(rep: CaseReport, case_id: str):
    for k, b, label, const, quad in SUM_SQUARES.get(case_id, []):
        got = sum_squares_bound(k, b, Quadratic(1, 0))
        rep.add(f"sum of squares {label} <= b^2/k + k D^2", f"{const} + {quad} D^2", f"{got[0]} + {got[1]} D^2",
                got == (F(const), F(quad)))


def _run_imported_delta(rep: CaseReport, case_id: str):
    if case_id in IMPORTED_DELTAS:
        rep.add("perturbation bound from the full-scale automated search", IMPORTED_DELTAS[case_id],
                IMPORTED_DELTAS[case_id], verdict="imported",
                note="taken from the full-scale computation; not reproduced at desk scale")


def _hard_point_check(rep: CaseReport, case_id: str):
    """The neighbourhood centre must satisfy the target with equality-like tightness."""
    if case_id not in HARD_POINTS:
        return
    from .exact import tail_probability
    w = HARD_POINTS[case_id]
    if sum(v * v for v in w) != 1:
        return
    ge = tail_probability(w, 1)
    gt = tail_probability(w, 1, strict=True)
    rep.add("centre: P(X >= 1) and P(X > 1)", f">= {TOMASZEWSKI_TARGET}", f"{ge.value}, {gt.value}",
            ge.value >= TOMASZEWSKI_TARGET)


def _case_a(rep: CaseReport):
    delta, allowed = F(4, 100), F(1, 15)
    rep.add("imported result for a_1 >= 1 - delta: delta within the admissible range", f"{delta} <= {allowed}",
            delta <= allowed, delta <= allowed, note="proof imported from prior work on the same inequality")
    rep.conclusion = TOMASZEWSKI_TARGET


def _case_h(rep: CaseReport):
    c = [HALF] * 3 + [QUARTER] * 4
    delta = IMPORTED_DELTAS["H"]
    probs = structured_interval_probs(c, 1, HALF, 7 * delta)
    got = tuple(probs.by_r.get(r, F(0)) for r in range(4))
    want = (F(16, 128), F(9, 128), F(4, 128), F(1, 128))
    rep.add("(p_0, p_1, p_2, p_3) with intervals of half-width 7D", _fmt_probs(want), _fmt_probs(got), got == want)
    # q*p_0 + (1-q)*(p_1+p_2+p_3) is linear in q in [0, 1]; its minimum is at an endpoint.
    rest = got[1] + got[2] + got[3]
    bound = min(got[0], rest)
    rep.add("min over q of q*p_0 + (1-q)*(p_1+p_2+p_3)", F(14, 128), bound, bound == F(14, 128))
    rep.conclusion = bound


def _pairing(rep: CaseReport, k: int, base_A, base_B, bA, bB, s, want_A, want_B, want_p):
    pc = pairing_certificate(k, lambda z: sum(z) >= 3, lambda z: sum(z) == 1, bA, bB, s, base_A, base_B)
    rep.add("pairing branch: (|A|, |B|)", (want_A, want_B), (pc.size_A, pc.size_B),
            (pc.size_A, pc.size_B) == (want_A, want_B))
    rep.add("pairing branch: sign sets dominate the bounded patterns", True, pc.dominated, pc.dominated)
    rep.add(f"pairing branch: {bA} + {bB} >= 2s", f">= {float(2 * s):.6f}", float(pc.bound_A + pc.bound_B),
            pc.certified)
    rep.add("pairing branch: certified probability |A|/2^k", want_p, pc.probability, pc.probability == want_p)
    return pc.probability


def run_case(case_id: str, table=None, seed: int = 0, search_budget: Optional[int] = None) -> CaseReport:
    """Execute one case script.  With a table, runs the desk-scale search step where one exists."""
    if case_id not in CASE_IDS:
        raise UnsupportedInputError(f"unknown case {case_id!r}; expected one of {', '.join(CASE_IDS)}")
    rep = CaseReport(case_id, TITLES[case_id], target=TARGETS[case_id])
    if case_id == "A":
        _case_a(rep)
        return rep
    _run_structural(rep, case_id)
    _run_small_sums(rep, case_id)
    _run_sum_squares(rep, case_id)
    _run_imported_delta(rep, case_id)
    _hard_point_check(rep, case_id)
    if case_id == "H":
        _case_h(rep)
    else:
        bounds = []
        if case_id == "sqrt5":
            bounds.append(_pairing(rep, 7, (-1, -1, 1, 1, 1, 1, 1), (-1, -1, -1, 1, 1, 1, 1), F(95, 100),
                                   F(175, 1000), _R5, 29, 35, F(29, 128)))
        if case_id == "sqrt3":
            bounds.append(_pairing(rep, 5, (-1, 1, 1, 1, 1), (-1, -1, 1, 1, 1), F(104, 100), F(23, 100), _R3,
                                   6, 10, F(3, 16)))
        for spec in LARGE_VARIANCE[case_id]:
            b = _run_large_variance(rep, spec, seed)
            if b is not None:
                bounds.append(b)
        rep.conclusion = min(bounds) if bounds else None
    if rep.conclusion is not None:
        rep.add("conclusion reaches the target", f">= {rep.target}", rep.conclusion, rep.conclusion >= rep.target)
    if table is not None and case_id == "sqrt7":
        _sqrt7_search(rep, table, search_budget)
    return rep


def sqrt7_search(table, budget: Optional[int] = None, rounds: int = 5, d: int = 10):
    """Desk-scale localisation of potential counterexamples at threshold 1/sqrt(7)."""
    from .search import LinearConstraint, feedback_iterate
    c = LinearConstraint((1,), _R7, "first weight below the threshold (structural)")
    return feedback_iterate(table, _R7, F(1, 4), 7, d, rounds, [c], budget=budget)


def _sqrt7_search(rep: CaseReport, table, budget):
    result, history = sqrt7_search(table, budget)
    if not result.conclusive:
        rep.add("desk search envelope within 0.05 of 1/sqrt(7)", "conclusive", "budget exhausted",
                verdict="inconclusive")
        return
    env = result.envelope
    if env is None:
        rep.add("desk search envelope within 0.05 of 1/sqrt(7)", "nonempty envelope", "empty", verdict="pass",
                note="every box was discarded")
        return
    dev = max(max(abs(float(lo) - float(_R7)), abs(float(hi) - float(_R7))) for lo, hi in env)
    rep.add("desk search envelope within 0.05 of 1/sqrt(7)", "<= 0.05",
            f"{dev:.4f} after {len(history)} rounds (d = {result.d})", dev <= 0.05)
