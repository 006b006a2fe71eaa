import numpy as np
import pytest

from splicecop import PiecewiseFunction, context, surface, validate_curve, validate_section
from splicecop.checks import GridSurface, check_quasi_copula, check_two_increasing, merge_coords
from splicecop.errors import DomainError
from splicecop.oracle import (
    CheckerboardProblem,
    checkerboard_extend,
    compare,
    default_nodes,
    in_band,
    lp_sup_at,
    solve,
    tableau,
)


@pytest.fixture(scope="module")
def m_ctx():
    ident = validate_curve(PiecewiseFunction.identity())
    return context(validate_section(ident, PiecewiseFunction.identity()))


def test_section_of_m_pins_everything(m_ctx):
    assert lp_sup_at(m_ctx, 4, 2, 2) == pytest.approx(0.5, abs=1e-9)


def test_curve_node_is_pinned(ex1):
    assert lp_sup_at(ex1, 16, 8, 8) == pytest.approx(0.125, abs=1e-9)


def test_off_curve_sandwich(ex1, ex3):
    for ctx in (ex1, ex3):
        rows, mesh = compare(ctx, 16, default_nodes(16))
        assert len([r for r in rows if not r.on_curve]) == 5
        for r in rows:
            assert in_band(r.gap, mesh)
            if r.on_curve:
                assert abs(r.gap) <= 1e-9


def test_gap_shrinks_on_nested_grids(ex3):
    gaps = []
    for n in (8, 16, 32):
        a, b = 2 * n // 8, 6 * n // 8
        x, y = a / n, float(ex3.phi(b / n))
        gaps.append(lp_sup_at(ex3, n, a, b) - surface(ex3, "SPLICE", x, y))
    assert gaps[0] >= gaps[1] >= gaps[2] >= -1e-7
    assert gaps[2] < gaps[0]


def test_optimal_mass_is_feasible_and_extends_to_a_copula(ctxs):
    for ctx in ctxs.values():
        p = CheckerboardProblem.from_context(ctx, 12)
        value, q = solve(p, 9, 3)
        q.check()
        assert checkerboard_extend(q, q.xs[9], q.ys[3]) == pytest.approx(value, abs=1e-9)
        assert checkerboard_extend(q, 1.0, 1.0) == pytest.approx(1.0, abs=1e-9)
        xs = merge_coords(q.xs, np.linspace(0, 1, 30))
        ys = merge_coords(q.ys, np.linspace(0, 1, 30))
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        g = GridSurface(xs, ys, checkerboard_extend(q, X, Y), "LP")
        assert check_quasi_copula(g).passed
        assert check_two_increasing(g).passed


def test_independence_mass():
    p = CheckerboardProblem.independence(4)
    p.check()
    assert checkerboard_extend(p, 0.5, 0.5) == pytest.approx(0.25)
    assert checkerboard_extend(p, 1.0, 1.0) == pytest.approx(1.0)


def test_extend_rejects_infeasible_mass():
    p = CheckerboardProblem.independence(3)
    bad = p.with_mass(np.eye(3) / 2)
    with pytest.raises(DomainError):
        checkerboard_extend(bad, 0.5, 0.5)


def test_argument_checks(ex1):
    with pytest.raises(DomainError):
        CheckerboardProblem.from_context(ex1, 65)
    with pytest.raises(DomainError):
        lp_sup_at(ex1, 8, 0, 3)


def test_tableau_dump(ex1):
    p = CheckerboardProblem.from_context(ex1, 3)
    text = tableau(p, 1, 2)
    lines = text.splitlines()
    assert lines[0] == "rows 8" and lines[1] == "cols 9"
    assert "objective max" in lines and "constraints" in lines
    assert len(lines) == 5 + 8
