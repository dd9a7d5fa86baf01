from fractions import Fraction as F

import pytest

from conftest import rational_unit_vector
from tailcert import search as S
from tailcert.errors import UnsupportedInputError
from tailcert.exact import Surd, tail_probability


def test_h_max_examples():
    box = S.Box(((F(2, 5), F(1, 2)), (F(1, 5), F(3, 10))))
    assert S.h_max((1, -1), box) == F(3, 10)
    assert S.h_max((1, 1), box) == F(4, 5)
    assert S.h_max((-1, -1), box) == F(-3, 5)
    with pytest.raises(UnsupportedInputError):
        S.h_max((1,), box)
    with pytest.raises(UnsupportedInputError):
        S.h_max((1, 0), box)


def test_box_validation_and_contains():
    with pytest.raises(UnsupportedInputError):
        S.Box(((F(1, 2), F(1, 3)),))
    with pytest.raises(UnsupportedInputError):
        S.Box(((F(0), F(3, 2)),))
    b = S.Box(((F(1, 2), F(1)), (F(0), F(1, 4))))
    assert b.contains([F(3, 4)])
    assert b.contains([F(1, 2), F(1, 4), F(9)])
    assert not b.contains([F(1, 4)])


def test_p_zero_discards_everything(small_table):
    box = S.Box(((F(0), F(1, 10)),))
    assert S.test_box(box, small_table, 1, 0).discard


def test_variance_infeasible_box(small_table):
    box = S.Box(((F(4, 5), F(9, 10)), (F(7, 10), F(4, 5))))
    res = S.test_box(box, small_table, 1, 1)
    assert res.discard and res.reason == "variance"


def test_linear_constraint_semantics():
    c = S.LinearConstraint((1, 1), 1, "a1+a2")
    assert c.excludes([F(1, 2), F(1, 2)], [F(3, 5), F(3, 5)])
    assert not c.excludes([F(1, 2), F(2, 5)], [F(3, 5), F(3, 5)])
    weak = S.LinearConstraint((1, 1), 1, "a1+a2", strict=False)
    assert not weak.excludes([F(1, 2), F(1, 2)], [F(3, 5), F(3, 5)])
    diff = S.LinearConstraint((1, -1), F(1, 2), "gap")
    # The box minimum of a1 - a2 uses the largest a2.
    assert diff.excludes([F(1, 2), F(0)], [F(1, 2), F(1, 5)]) is False
    assert diff.excludes([F(1, 2), F(0)], [F(1, 2), F(0)]) is True
    with pytest.raises(UnsupportedInputError):
        S.LinearConstraint((2,), 1, "x")
    with pytest.raises(UnsupportedInputError):
        S.LinearConstraint((1,), 1, "")


def test_empty_prior_is_vacuous(small_table):
    prior = [(F(0), F(1, 2)), (F(9, 10), F(1))]
    res = S.search(small_table, 1, F(7, 64), 2, 4, prior=prior)
    assert res.survivors == [] and res.conclusive and res.envelope is None


def test_search_requires_positive_sizes(small_table):
    with pytest.raises(UnsupportedInputError):
        S.search(small_table, 1, F(7, 64), 0, 4)
    with pytest.raises(UnsupportedInputError):
        S.feedback_iterate(small_table, 1, F(7, 64), 2, 4, 0)


def test_envelope_is_hull(small_table):
    res = S.search(small_table, 1, F(7, 64), 2, 6)
    for i, (lo, hi) in enumerate(res.envelope):
        assert lo == min(b.intervals[i][0] for b in res.survivors)
        assert hi == max(b.intervals[i][1] for b in res.survivors)


def test_single_round_matches_search(small_table):
    c = [S.LinearConstraint((1,), Surd.sqrt(F(1, 7)), "a1-threshold")]
    one = S.search(small_table, Surd.sqrt(F(1, 7)), F(1, 4), 3, 5, c)
    res, hist = S.feedback_iterate(small_table, Surd.sqrt(F(1, 7)), F(1, 4), 3, 5, 1, c)
    assert len(hist) == 1
    assert res.survivors == one.survivors and res.envelope == one.envelope


def test_feedback_envelopes_shrink(small_table):
    c = [S.LinearConstraint((1,), Surd.sqrt(F(1, 7)), "a1-threshold")]
    _, hist = S.feedback_iterate(small_table, Surd.sqrt(F(1, 7)), F(1, 4), 4, 5, 3, c)
    for prev, cur in zip(hist, hist[1:]):
        if cur.envelope is None:
            continue
        for (plo, phi), (clo, chi) in zip(prev.envelope, cur.envelope):
            assert plo <= clo and chi <= phi


def test_deterministic(small_table):
    a = S.search(small_table, 1, F(7, 64), 3, 6)
    b = S.search(small_table, 1, F(7, 64), 3, 6)
    assert a.survivors == b.survivors and a.stats == b.stats


def test_budget_gives_non_conclusive(small_table):
    res = S.search(small_table, 1, F(7, 64), 3, 8, budget=5)
    assert not res.conclusive


def test_workers_match_serial(small_table):
    a = S.search(small_table, 1, F(7, 64), 3, 6)
    b = S.search(small_table, 1, F(7, 64), 3, 6, workers=2)
    assert a.survivors == b.survivors and a.conclusive and b.conclusive


def test_constraint_prunes(small_table):
    free = S.search(small_table, 1, F(7, 64), 2, 8)
    cons = S.search(small_table, 1, F(7, 64), 2, 8, [S.LinearConstraint((1, 1), 1, "a1+a2")])
    assert len(cons.survivors) < len(free.survivors)
    assert cons.stats["discarded_constraint"] > 0
    for b in cons.survivors:
        assert b.intervals[0][0] + b.intervals[1][0] < 1


def _witness(rng, max_tries=200):
    """A rational unit vector and (s, p) with P(X >= s) < p."""
    for _ in range(max_tries):
        w = rational_unit_vector(rng, int(rng.integers(2, 10)), denom=5)
        s = F(int(rng.integers(-50, 150)), 100)
        t = tail_probability(w, s).value
        if t < 1:
            return w, s, min(F(1), t + F(int(rng.integers(1, 50)), 1000))
    raise AssertionError("no witness found")


def test_planted_witness_boxes_kept(small_table, rng):
    for _ in range(200):
        w, s, p = _witness(rng)
        r = int(rng.integers(1, min(len(w), 4) + 1))
        iv = []
        for wi in w[:r]:
            lo = max(F(0), wi - F(int(rng.integers(0, 30)), 1000))
            hi = min(F(1), wi + F(int(rng.integers(0, 30)), 1000))
            iv.append((lo, hi))
        assert not S.test_box(S.Box(tuple(iv)), small_table, s, p).discard


def test_planted_witness_survives_search(small_table, rng):
    for _ in range(15):
        w, s, p = _witness(rng)
        k = int(rng.integers(1, 4))
        res = S.search(small_table, s, p, k, 6)
        assert any(b.contains(w[:k]) for b in res.survivors)
