from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splicecop.errors import DomainError
from splicecop.piecewise import (
    DECREASING,
    INCREASING,
    Piece,
    PiecewiseFunction,
    as_exponent,
    evaluate,
    roots_in,
)


def test_power_sum_values():
    assert evaluate(PiecewiseFunction.from_terms([(1, 2)]), 0.5) == 0.25
    assert evaluate(PiecewiseFunction.from_terms([(1, [1, 2])]), 0.25) == pytest.approx(0.5, abs=1e-15)


def test_table_interpolates():
    f = PiecewiseFunction((Piece.table([(0, 0), (1, 1)]),))
    assert f(0.3) == pytest.approx(0.3, abs=1e-15)


def test_domain_violation():
    f = PiecewiseFunction.identity()
    with pytest.raises(DomainError):
        evaluate(f, 1.5)
    with pytest.raises(DomainError):
        f(-0.1)


def test_junction_uses_left_piece():
    left = Piece.power_sum(0.0, 0.5, [(1, 1)])
    right = Piece.power_sum(0.5, 1.0, [(2, 1), (-0.5, 0)])
    f = PiecewiseFunction((left, right))
    assert f(0.5) == 0.5
    # slopes differ at the junction: the left one is reported
    assert f.derivative(0.5) == pytest.approx(1.0)


def test_non_contiguous_rejected():
    with pytest.raises(DomainError):
        PiecewiseFunction((Piece.power_sum(0, 0.4, [(1, 1)]), Piece.power_sum(0.5, 1, [(1, 1)])))


def test_discontinuity_rejected():
    with pytest.raises(DomainError):
        PiecewiseFunction((Piece.power_sum(0, 0.5, [(1, 1)]), Piece.power_sum(0.5, 1, [(1, 2)])))


def test_monotone_flag_checked():
    with pytest.raises(DomainError):
        PiecewiseFunction((Piece.power_sum(0, 1, [(1, 1), (-1, 2)], INCREASING),))
    f = PiecewiseFunction((Piece.power_sum(0, 1, [(1, 0), (-1, 1)], DECREASING),))
    assert f.piece_flags() == [DECREASING]


def test_table_knots_must_increase():
    with pytest.raises(DomainError):
        Piece.table([(0, 0), (0.5, 1), (0.4, 1), (1, 1)])


def test_rational_exponents():
    assert as_exponent([1, 2]) == Fraction(1, 2)
    assert as_exponent(3) == 3
    with pytest.raises(DomainError):
        as_exponent(-1)


def test_closed_form_roots():
    # derivative of t - t^3 vanishes at 1/sqrt(3)
    assert roots_in([(1, 0), (-3, 2)], 0, 1) == pytest.approx([1 / np.sqrt(3)])
    # cubic with three roots in (0, 1)
    terms = [(-0.006, 0), (0.11, 1), (-0.6, 2), (1, 3)]
    assert roots_in(terms, 0, 1) == pytest.approx([0.1, 0.2, 0.3], abs=1e-12)


def test_scan_roots_for_fractional_powers():
    # d/dt (t^0.5 - t) = 0 at t = 1/4
    f = PiecewiseFunction.from_terms([(1, [1, 2]), (-1, 1)])
    assert f.extrema == pytest.approx([0.25], abs=1e-10)


def test_extrema_of_gap_functions():
    hat = PiecewiseFunction.from_terms([(1, 1), (-1, 3)])
    tilde = PiecewiseFunction.from_terms([(1, 2), (-1, 3)])
    assert hat.extrema == pytest.approx([1 / np.sqrt(3)])
    assert tilde.extrema == pytest.approx([2 / 3])


def test_minimum_splits_at_crossing():
    f = PiecewiseFunction.identity().minimum(PiecewiseFunction.from_terms([(1, 2)]))
    ts = np.linspace(0, 1, 101)
    assert np.allclose(f(ts), ts**2)
    g = PiecewiseFunction.from_terms([(0.5, 0)]).maximum(PiecewiseFunction.identity())
    assert np.allclose(g(ts), np.maximum(0.5, ts))
    assert 0.5 in list(g.edges)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.sampled_from([0, 1, 2, 3, 0.5, 1.5])),
                min_size=1, max_size=4),
       st.lists(st.floats(0, 1), min_size=1, max_size=20))
def test_arithmetic_matches_pointwise(terms, ts):
    f = PiecewiseFunction.from_terms(terms)
    g = PiecewiseFunction.identity().minimum(PiecewiseFunction.from_terms([(1, 2)]))
    ts = np.array(ts)
    assert np.allclose((f - g)(ts), f(ts) - g(ts), atol=1e-12)
    assert np.allclose((f + 2.0)(ts), f(ts) + 2.0, atol=1e-12)
    assert np.allclose((f * 3.0)(ts), 3.0 * f(ts), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.sampled_from([0, 1, 2, 3])), min_size=1, max_size=4))
def test_monotone_knots_split_into_monotone_runs(terms):
    f = PiecewiseFunction.from_terms(terms)
    knots = f.monotone_knots
    for a, b in zip(knots, knots[1:]):
        vals = f(np.linspace(a, b, 50))
        d = np.diff(vals)
        assert np.all(d >= -1e-12) or np.all(d <= 1e-12)
