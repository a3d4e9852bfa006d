import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cbpmde import (DISPARITIES, HD, LD, NED, ContaminationSpec, Pmf, PoissonFamily, contaminate,
                    disparity_gradient, disparity_value, get_disparity, pearson_residual)
from cbpmde.disparity import aligned, evaluation_K, pearson_residuals
from cbpmde.errors import GradientUndefinedError

SPECS = list(DISPARITIES.values())
GRID = np.linspace(-1, 10, 1101)


def random_pmf(draw_weights):
    w = np.asarray(draw_weights, dtype=float)
    return Pmf(w / w.sum())


pmf_weights = arrays(float, st.integers(2, 25), elements=st.floats(0.0, 1.0)).filter(
    lambda w: w.sum() > 1e-3
)
positive_weights = arrays(float, st.integers(2, 25), elements=st.floats(0.01, 1.0))


def direct_value(spec, q, p):
    """Sum of G(delta) p over cells with p > 0, with the zero-mass rule elsewhere."""
    qv, pv = aligned(q, p)
    total = 0.0
    for qk, pk in zip(qv, pv):
        if pk > 0:
            total += float(spec.g(qk / pk - 1)) * pk
        elif qk > 0:
            total += {"inf": math.inf, "q": qk, "zero": 0.0}[spec.zero_model_mass_rule]
    return total


# -- G and the residual adjustment function -----------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_g_shape(spec):
    g = spec.g(GRID)
    assert spec.g(0.0) == 0
    assert np.all(np.diff(g, 2) > 0)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_raf_standardized(spec):
    h = 1e-5
    assert spec.raf(0.0) == 0
    assert (spec.raf(h) - spec.raf(-h)) / (2 * h) == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(spec.raf(GRID)) >= 0)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_raf_algebra(spec):
    d = np.linspace(-0.999, 10, 500)
    raw = (d + 1) * spec.g_prime(d) - spec.g(d)
    np.testing.assert_allclose(spec.raf(d), spec.raf_scale * raw + spec.raf_shift, atol=1e-12)


def test_raf_closed_forms():
    d = np.linspace(-1, 10, 111)
    np.testing.assert_allclose(LD.raf(d), d)
    np.testing.assert_allclose(HD.raf(d), 2 * (np.sqrt(d + 1) - 1))
    np.testing.assert_allclose(NED.raf(d), 2 - (2 + d) * np.exp(-d))


def test_g_derivatives_match_finite_differences():
    d = np.linspace(-0.9, 8, 80)
    h = 1e-6
    for spec in SPECS:
        fd = (spec.g(d + h) - spec.g(d - h)) / (2 * h)
        np.testing.assert_allclose(spec.g_prime(d), fd, rtol=1e-6, atol=1e-8)


def test_boundedness_metadata():
    d = np.linspace(-1, 1e3, 10_001)
    assert NED.bounded_G and NED.bounded_A_family
    assert np.all(np.abs(NED.g(d)) <= math.e - 1) and np.all(np.abs(NED.g_prime(d)) <= math.e)
    assert not HD.bounded_G and HD.g(1e6) > 900
    assert not LD.bounded_A_family and not LD.bounded_G
    assert HD.g_at_minus_one == 1.0
    assert NED.g_at_minus_one == pytest.approx(math.e - 1)


def test_registry():
    assert get_disparity("hd") is HD
    assert get_disparity("Ned") is NED
    with pytest.raises(ValueError):
        get_disparity("chi2")


# -- residuals and values -----------------------------------------------------

def test_pearson_residual_examples():
    q = Pmf([0.2, 0.8])
    model = Pmf([0.1, 0.9])
    assert pearson_residual(q, model, 0) == pytest.approx(1.0)
    assert pearson_residual(model, model, 1) == 0
    assert pearson_residual(Pmf([0.0, 1.0]), model, 0) == -1
    assert pearson_residual(Pmf([0.0, 1.0]), Pmf([1.0]), 1) == math.inf
    assert pearson_residual(Pmf([1.0]), Pmf([1.0]), 4) == 0
    d = pearson_residuals(Pmf([0.0, 0.5, 0.5]), Pmf([0.5, 0.5]))
    np.testing.assert_allclose(d, [-1, 0, math.inf])


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_value_zero_at_model(spec, poisson):
    p = poisson.pmf_at(7.0)
    assert disparity_value(spec, p, p) == pytest.approx(0.0, abs=1e-15)


def test_hd_disjoint_point_masses():
    # q_0 = 1 is unmatched (contributes q_0), p_1 = 1 has delta = -1 (contributes G(-1) p_1)
    assert disparity_value(HD, Pmf.point_mass(0), Pmf.point_mass(1)) == pytest.approx(2.0)


def test_zero_model_mass_rules():
    q, p = Pmf([0.5, 0.5]), Pmf.point_mass(0)
    assert disparity_value(LD, q, p) == math.inf
    assert disparity_value(HD, q, p) == pytest.approx(HD.g(0.0) + 0.5 + (math.sqrt(.5) - 1) ** 2)
    assert disparity_value(NED, q, p) == pytest.approx(math.exp(-(0.5 - 1)) - 1)


@given(pmf_weights, positive_weights)
def test_cell_forms_match_definition(wq, wp):
    q, p = random_pmf(wq), random_pmf(wp)
    for spec in SPECS:
        expected = direct_value(spec, q, p)
        assert disparity_value(spec, q, p) == pytest.approx(expected, rel=1e-9, abs=1e-12)


@given(pmf_weights, pmf_weights)
def test_nonnegative_and_identifying(wq, wp):
    q, p = random_pmf(wq), random_pmf(wp)
    for spec in (LD, HD):
        v = disparity_value(spec, q, p)
        assert v >= -1e-15
        if q.l1_distance(p) > 1e-6:
            assert v > 0
        assert disparity_value(spec, q, q) == pytest.approx(0, abs=1e-15)


@given(pmf_weights, pmf_weights, positive_weights)
def test_ned_l1_continuity(w1, w2, wp):
    q1, q2, p = random_pmf(w1), random_pmf(w2), random_pmf(wp)
    gap = abs(disparity_value(NED, q1, p) - disparity_value(NED, q2, p))
    assert gap <= math.e * q1.l1_distance(q2) + 1e-12


# -- gradient -----------------------------------------------------------------

def _fd_value(spec, family, q, theta, K, h=1e-6):
    def val(t):
        return disparity_value(spec, q, family.pmf_at(t, K))
    return (val(theta + h) - val(theta - h)) / (2 * h)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
@pytest.mark.parametrize("theta", [5.0, 7.0, 9.0])
def test_gradient_matches_finite_difference(spec, theta, poisson):
    q = contaminate(poisson.pmf_at(7.0), ContaminationSpec(0.1, 12))
    K = evaluation_K(poisson, q)
    q = Pmf(q.padded(K), q.tail_mass)
    grad = disparity_gradient(spec, poisson, q, theta, K)
    assert grad == pytest.approx(_fd_value(spec, poisson, q, theta, K), rel=1e-4)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
@given(theta=st.floats(0.5, 25))
def test_gradient_vanishes_at_model(spec, theta):
    fam = PoissonFamily()
    q = fam.pmf_at(theta)
    assert abs(disparity_gradient(spec, fam, q, theta)) < 1e-10


@given(positive_weights, st.floats(1.0, 20.0))
def test_ld_gradient_closed_form(w, theta):
    fam = PoissonFamily()
    q = random_pmf(w)
    assert disparity_gradient(LD, fam, q, theta) == pytest.approx((theta - q.mean()) / theta,
                                                                 rel=1e-9, abs=1e-12)


def test_ld_gradient_undefined_on_support_mismatch(poisson):
    q = Pmf.point_mass(400)  # Poisson(0.1) mass at 400 underflows to exactly 0
    with pytest.raises(GradientUndefinedError):
        disparity_gradient(LD, poisson, q, 0.1)
    assert math.isfinite(disparity_gradient(HD, poisson, q, 0.1))
    assert math.isfinite(disparity_gradient(NED, poisson, q, 0.1))


def test_evaluation_K_covers_both(poisson):
    q = Pmf.point_mass(120)
    assert evaluation_K(poisson, q) == 120
    assert evaluation_K(poisson, Pmf.point_mass(2)) == poisson.truncation(30.0)
    assert evaluation_K(poisson, Pmf.point_mass(2), [7.0]) == poisson.truncation(7.0)
