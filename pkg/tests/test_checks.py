import json

import numpy as np
import pytest

from splicecop import (
    PiecewiseFunction,
    context,
    interval_family_section,
    random_section,
    validate_curve,
)
from splicecop.checks import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    SUFFICIENT_PASS,
    GridSurface,
    VerdictReport,
    Witness,
    check_quasi_copula,
    check_two_increasing,
    coincidence_criterion,
    copulahood_criterion,
    copulahood_slacks,
    criterion_points,
    derivative_criterion,
    fill_grid,
    k_copula_condition,
    knot_axes,
    m_behavior_scan,
    matched_axes,
    max_abs_difference,
    merge_coords,
    phi_simple_check,
    uniform_axis,
)


@pytest.fixture(scope="module")
def min_section():
    """gamma = min(t, phi) with phi = t^2."""
    phi = validate_curve(PiecewiseFunction.from_terms([(1, 2)]))
    return context(interval_family_section(phi, []))


# grids -------------------------------------------------------------------------

def test_fill_m(ex1):
    g = fill_grid(ex1, "M", [0, 0.5, 1], [0, 0.5, 1])
    assert np.array_equal(g.values, [[0, 0, 0], [0, 0.5, 0.5], [0, 0.5, 1]])


def test_fill_splice_curve_node(ex1):
    g = fill_grid(ex1, "SPLICE", [0, 1 / 3, 1], [0, 1 / 9, 1])
    assert g.values[1, 1] == pytest.approx(1 / 27, abs=1e-15)


def test_fill_pi(ex1):
    xs = uniform_axis(5)
    g = fill_grid(ex1, "PI", xs, xs)
    assert np.array_equal(g.values, np.outer(xs, xs))


def test_fill_independent_of_workers(ex1):
    xs, ys = knot_axes(ex1, 57)
    a = fill_grid(ex1, "SPLICE", xs, ys, workers=1)
    b = fill_grid(ex1, "SPLICE", xs, ys, workers=4)
    assert np.array_equal(a.values, b.values)


def test_fill_reports_bad_coordinates(ex1):
    with pytest.raises(ValueError):
        fill_grid(ex1, "SPLICE", [0, 1.5], [0, 1])


def test_grid_is_immutable(ex1):
    g = fill_grid(ex1, "M", [0, 1], [0, 1])
    with pytest.raises(ValueError):
        g.values[0, 0] = 1.0


def test_grid_rejects_bad_axes():
    with pytest.raises(ValueError):
        GridSurface([0, 0.5], [0, 1], np.zeros((2, 2)), "M")
    with pytest.raises(ValueError):
        GridSurface([0, 0.6, 0.5, 1], [0, 1], np.zeros((4, 2)), "M")


def test_knot_axes_contain_curve_points(ex1):
    xs, ys = knot_axes(ex1, 3)
    assert 0.5 in xs and 0.25 in ys
    assert np.all(np.diff(xs) > 0) and np.all(np.diff(ys) > 0)


def test_merge_coords_fuses_near_duplicates():
    out = merge_coords([0.5, 0.5 + 1e-14, 0.25], [1 - 1e-15])
    assert list(out) == [0.0, 0.25, 0.5, 1.0]


# quasi-copula / 2-increasing -----------------------------------------------

def test_quasi_copula_examples(ex1):
    xs, ys = knot_axes(ex1, 101)
    assert check_quasi_copula(fill_grid(ex1, "SPLICE", xs, ys)).verdict == PASS
    assert check_quasi_copula(fill_grid(ex1, "W", xs, ys)).verdict == PASS
    xs = uniform_axis(5)
    vals = np.outer(xs, xs)
    vals[-1, 2] = 0.0  # (1, 0.5)
    rep = check_quasi_copula(GridSurface(xs, xs, vals, "PI"))
    assert rep.verdict == FAIL
    assert any(w.coords == (1.0, 0.5) for w in rep.witnesses)


def test_example_1_negative_volume(ex1):
    xs = merge_coords(uniform_axis(13), [1 / 4, 1 / 3])
    ys = merge_coords(uniform_axis(13), [1 / 16, 1 / 9])
    g = fill_grid(ex1, "SPLICE", xs, ys)
    rep = check_two_increasing(g)
    assert rep.verdict == FAIL
    i1, i2 = np.searchsorted(xs, [1 / 4, 1 / 3])
    j1, j2 = np.searchsorted(ys, [1 / 16, 1 / 9])
    v = g.values
    vol = v[i2, j2] - v[i2, j1] - v[i1, j2] + v[i1, j1]
    assert vol == pytest.approx(-37 / 1728, abs=1e-9)
    assert rep.witnesses[0].slack <= rep.stats["min_volume"]


def test_two_increasing_passes(ex1):
    xs = uniform_axis(200)
    assert check_two_increasing(fill_grid(ex1, "C1", xs, xs)).verdict == PASS
    assert check_two_increasing(fill_grid(ex1, "M", xs, xs)).verdict == PASS


# pair criteria -----------------------------------------------------------------

def test_copulahood_example_1(ex1):
    rep = copulahood_criterion(ex1, 400)
    assert rep.verdict == FAIL
    assert rep.witnesses[0].slack < -1e-9
    # the pair spanning the rectangle of negative volume fails all three inequalities
    s = copulahood_slacks(ex1, 1 / 4, 1 / 3)
    assert max(s["s2"], s["s3"], s["s4"]) < -1e-9


def test_copulahood_example_3(ex3):
    rep = copulahood_criterion(ex3, 400)
    assert rep.verdict == PASS
    assert rep.stats["max_abs_s4_when_holding"] <= 1e-9


def test_copulahood_diagonal(ctxs):
    assert copulahood_criterion(ctxs["diag-pi"], 200).verdict == FAIL


def test_refined_witness_not_worse(ex1):
    rep = copulahood_criterion(ex1, 50)
    plain = copulahood_criterion(ex1, 50, refine=False)
    assert rep.witnesses[0].slack <= plain.witnesses[0].slack


def test_derivative_criterion(ctxs, ex1, min_section):
    assert derivative_criterion(ctxs["interval-family"]) == SUFFICIENT_PASS
    assert derivative_criterion(ex1) == INCONCLUSIVE
    assert derivative_criterion(min_section) == SUFFICIENT_PASS


def test_coincidence(ctxs, ex1, ex3):
    assert coincidence_criterion(ex1, 200).verdict == PASS
    rep = coincidence_criterion(ex3, 200)
    assert rep.verdict == FAIL
    assert any(w.coords[0] < 0.4 < w.coords[1] and w.slack < -1e-9 for w in rep.witnesses)
    assert coincidence_criterion(ctxs["example-5ii"], 200).verdict == PASS


def test_phi_simple(ex1, ex3, min_section):
    assert phi_simple_check(ex1)
    assert not phi_simple_check(ex3)
    assert phi_simple_check(min_section)


def test_k_condition(ctxs, min_section):
    assert k_copula_condition(ctxs["diag-pi"])
    assert not k_copula_condition(ctxs["interval-family"])
    assert k_copula_condition(min_section)


def test_m_behavior(ex1):
    xs = merge_coords(uniform_axis(7), [1 / 3])
    ys = merge_coords(uniform_axis(7), [1 / 81])
    nodes = m_behavior_scan(fill_grid(ex1, "SPLICE", xs, ys))
    assert any(abs(x - 1 / 3) < 1e-15 and abs(y - 1 / 81) < 1e-15 for x, y in nodes)
    g = uniform_axis(9)
    assert m_behavior_scan(fill_grid(ex1, "PI", g, g)) == []
    assert len(m_behavior_scan(fill_grid(ex1, "M", g, g))) == 7 * 7


# properties linking the procedures ------------------------------------------

@pytest.mark.parametrize("name", ["example-1", "example-2", "example-5ii", "diag-pi",
                                  "interval-family"])
def test_copulahood_matches_grid_volumes(ctxs, name):
    ctx = ctxs[name]
    n = 160
    xs, ys = matched_axes(ctx, n)
    grid = check_two_increasing(fill_grid(ctx, "SPLICE", xs, ys))
    assert copulahood_criterion(ctx, n).verdict == grid.verdict


@pytest.mark.parametrize("name", ["example-1", "example-2", "example-5ii", "diag-pi",
                                  "interval-family"])
def test_coincidence_matches_splice_minus_a(ctxs, name):
    ctx = ctxs[name]
    n = 160
    xs, ys = matched_axes(ctx, n)
    diff = max_abs_difference(fill_grid(ctx, "SPLICE", xs, ys), fill_grid(ctx, "A_UPPER", xs, ys))
    assert (coincidence_criterion(ctx, n).verdict == PASS) == (diff <= 1e-9)


def test_condition_one_implies_two_or_three(ctxs):
    for name in ("example-2", "interval-family"):
        ctx = ctxs[name]
        pts = criterion_points(ctx, 300)
        i, j = np.triu_indices(len(pts), k=1)
        s = copulahood_slacks(ctx, pts[i], pts[j])
        holds = s["s1"] >= -1e-9
        assert holds.any()
        assert np.all((s["s2"][holds] >= -1e-9) | (s["s3"][holds] >= -1e-9))


def test_condition_four_is_equality(ctxs, random_ctxs):
    for ctx in list(ctxs.values()) + random_ctxs:
        pts = criterion_points(ctx, 120)
        i, j = np.triu_indices(len(pts), k=1)
        s4 = copulahood_slacks(ctx, pts[i], pts[j])["s4"]
        held = s4 >= -1e-9
        assert np.all(np.abs(s4[held]) <= 1e-9)


def test_inequality_two_extends_to_the_right(random_ctxs, rng):
    for ctx in random_ctxs:
        x1, x2, x3 = np.sort(rng.uniform(0, 1, (3, 2000)), axis=0)
        s_near = copulahood_slacks(ctx, x1, x2)
        s_far = copulahood_slacks(ctx, x1, x3)
        for key in ("s2", "s3"):
            ok = s_near[key] >= 0
            assert np.all(s_far[key][ok] >= -1e-12)


def test_phi_simple_implies_coincidence(ctxs):
    sections = list(ctxs.values()) + [context(random_section(seed, samples=512))
                                      for seed in range(100)]
    simple = 0
    for ctx in sections:
        if phi_simple_check(ctx, 60):
            simple += 1
            assert coincidence_criterion(ctx, 60).verdict == PASS
    assert simple >= 3


# reports -------------------------------------------------------------------------

def test_report_json_schema(ex1):
    rep = copulahood_criterion(ex1, 40)
    obj = json.loads(rep.to_json())
    assert set(obj) == {"check", "verdict", "resolution", "tolerance", "witnesses"}
    assert set(obj["witnesses"][0]) == {"coords", "slack", "boundary"}
    assert obj["resolution"] == 40


def test_failing_report_needs_witness():
    with pytest.raises(ValueError):
        VerdictReport("x", FAIL, 10, 1e-9, [Witness((0.1,), -1e-12)])
