import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splicecop import PiecewiseFunction, builtin_section, random_section
from splicecop.errors import DomainError
from splicecop.variation import (
    ADAPTIVE,
    ALTERNATING,
    MONOTONE_EXACT,
    MonotoneProfile,
    VariationQuery,
    alternating_sum,
    alternating_variation,
    total_variation,
)

HAT1 = PiecewiseFunction.from_terms([(1, 1), (-1, 3)])
PEAK = 2 * np.sqrt(3) / 9  # hat1 at 1/sqrt(3)


def test_monotone_stretch():
    assert total_variation(HAT1, 0.8, 0.9) == pytest.approx(0.117, abs=1e-14)


def test_unimodal_full_interval():
    assert total_variation(HAT1, 0, 1) == pytest.approx(4 * np.sqrt(3) / 9, abs=1e-14)
    assert total_variation(VariationQuery(HAT1, 0.0, 1.0)) == pytest.approx(2 * PEAK, abs=1e-14)


def test_sign_convention():
    assert total_variation(HAT1, 0.9, 0.2) == pytest.approx(-total_variation(HAT1, 0.2, 0.9))
    for method in (MONOTONE_EXACT, ADAPTIVE, ALTERNATING):
        assert total_variation(HAT1, 0.4, 0.4, method) == 0.0


def test_domain_checked():
    with pytest.raises(DomainError):
        total_variation(HAT1, -0.1, 0.5)


def test_unknown_method():
    with pytest.raises(ValueError):
        total_variation(HAT1, 0, 1, "magic")


def test_adaptive_smooth():
    for a, b in ((0, 1), (0.1, 0.7), (0.6, 0.95)):
        exact = total_variation(HAT1, a, b)
        assert total_variation(HAT1, a, b, ADAPTIVE) == pytest.approx(exact, abs=1e-9)


def test_adaptive_is_lower_bound_on_kinked_sections():
    for seed in range(10):
        hat = random_section(seed).hat
        exact = total_variation(hat, 0, 1)
        try:
            est = total_variation(hat, 0, 1, ADAPTIVE)
        except Exception as exc:  # ConvergenceError carries both estimates
            est = max(exc.estimates)
        assert est <= exact + 1e-12
        assert est >= exact - 1e-4


def test_alternating_examples():
    assert alternating_sum(HAT1(np.array([0, 1 / np.sqrt(3), 1]))) == pytest.approx(4 * np.sqrt(3) / 9)
    inc = PiecewiseFunction.from_terms([(1, 2)])
    assert alternating_variation(inc, 0.2, 0.7, partitions=0) == pytest.approx(0.45)
    hat3 = builtin_section("example-2").hat
    assert alternating_variation(hat3, 0, 1) == pytest.approx(total_variation(hat3, 0, 1), abs=1e-9)


def test_alternating_sum_equals_increment_sum():
    vals = np.array([0.0, 0.4, 0.1, 0.1, 0.5, 0.2, 0.3, 0.0])
    assert alternating_sum(vals) == pytest.approx(np.sum(np.abs(np.diff(vals))))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_additivity(seed, pts):
    f = random_section(seed, samples=256).tilde
    a, c, b = sorted(pts)
    assert total_variation(f, a, b) == pytest.approx(
        total_variation(f, a, c) + total_variation(f, c, b), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1))
def test_subadditivity(seed, a, b):
    sec = random_section(seed, samples=256)
    f, g = sec.hat, sec.tilde
    a, b = min(a, b), max(a, b)
    assert total_variation(f + g, a, b) <= total_variation(f, a, b) + total_variation(g, a, b) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1))
def test_alternating_never_exceeds_exact(seed, a, b):
    f = random_section(seed, samples=256).hat
    a, b = min(a, b), max(a, b)
    if b - a < 1e-9:
        return
    alt = alternating_variation(f, a, b)
    exact = total_variation(f, a, b)
    assert alt <= exact + 1e-9
    # monotone knots are candidates, so the best partition is exact
    assert alt == pytest.approx(exact, abs=1e-6)


def test_profile_interval_extrema():
    prof = MonotoneProfile.of(HAT1)
    assert prof.interval_max(0.2, 0.9) == pytest.approx(PEAK)
    assert prof.interval_max(0.9, 0.2) == pytest.approx(PEAK)
    assert prof.interval_min(0.2, 0.9) == pytest.approx(min(HAT1(0.2), HAT1(0.9)))
    xs = np.array([0.1, 0.3, 0.8])
    ys = np.array([0.2, 0.9, 0.85])
    ref = [HAT1(np.linspace(a, b, 20001)).max() for a, b in zip(xs, ys)]
    assert np.allclose(prof.interval_max(xs, ys), ref, atol=1e-8)


def _lemma_data(sec, n, rng):
    t1, t2 = np.sort(rng.uniform(0, 1, (2, n)), axis=0)
    hat = MonotoneProfile.of(sec.hat)
    tilde = MonotoneProfile.of(sec.tilde)
    return t1, t2, hat.variation(t1, t2), tilde.variation(t1, t2)


@pytest.mark.parametrize("seed", range(5))
def test_gap_bounds_random_sections(seed, rng):
    sec = random_section(seed)
    t1, t2, vh, vt = _lemma_data(sec, 10_000, rng)
    dphi = sec.phi(t2) - sec.phi(t1)
    dt = t2 - t1
    dh = sec.hat(t2) - sec.hat(t1)
    dtl = sec.tilde(t2) - sec.tilde(t1)
    # pointwise increments
    assert np.all(np.abs(dh) <= 2 * dphi + dh + 1e-9)
    assert np.all(np.abs(dtl) <= 2 * dt + dtl + 1e-9)
    assert np.all(np.abs(dh) + np.abs(dtl) <= dt + dphi + 1e-9)
    # variations
    assert np.all(vh <= 2 * dphi + dh + 1e-9)
    assert np.all(vt <= 2 * dt + dtl + 1e-9)
    assert np.all(vh + vt <= dt + dphi + 1e-9)
