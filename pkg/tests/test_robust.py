import math

import numpy as np
import pytest

from cbpmde import HD, LD, NED, ContaminationSpec, Pmf, contaminate
from cbpmde.errors import InvalidContaminationError
from cbpmde.robust import (alpha_influence, breakdown_probe, contaminated_model, functional,
                           hellinger_affinity, hellinger_breakdown_bound, influence_limit,
                           influence_limit_check, ld_functional_poisson, potential_bias,
                           relative_bias)

# Ratios of potential biases, HD/LD and NED/LD, for contaminated Poisson(7).
# Frozen from an independent 50-digit mpmath computation (Poisson pmf summed to
# k = 150, findroot on the disparity derivative).
MPMATH_RATIOS = [
    (0, -1e-4, 1.0286337598, 0.9979256594),
    (0, -9e-4, 1.77949118356, 0.72954327600),
    (8, -0.01, 1.01956639802, 0.99942951553),
    (8, -0.05, 1.11704481544, 0.98255840502),
    (20, -7.5e-6, 1.07195424048, 0.98812269364),
    (20, -2e-5, 1.26901772841, 0.89483151945),
]


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.2, 0.45])
def test_ld_influence_is_linear(poisson, alpha):
    L = [0, 3, 7, 12, 20, 33]
    r = alpha_influence(LD, poisson, 7.0, alpha, L)
    np.testing.assert_allclose(r.curve, np.array(L) - 7.0, atol=1e-4)
    np.testing.assert_allclose(r.limit_curve, np.array(L) - 7.0, atol=1e-12)
    assert r.curve.shape == (len(L),)


def test_limit_curve_vanishes_at_mean(poisson):
    assert influence_limit(poisson, 7.0, 7) == pytest.approx(0.0, abs=1e-15)
    assert influence_limit(poisson, 7.0, 20) == pytest.approx(13.0, rel=1e-12)


def test_bounded_influence_far_out(poisson):
    r_ld = alpha_influence(LD, poisson, 7.0, 0.05, [200])
    assert r_ld.curve[0] == pytest.approx(193.0, abs=1e-4)
    for spec in (HD, NED):
        r = alpha_influence(spec, poisson, 7.0, 0.05, [200])
        assert abs(r.curve[0]) < 1e-3


@pytest.mark.parametrize("spec", [HD, NED], ids=lambda s: s.name)
@pytest.mark.parametrize("alpha", [0.05, 0.2])
def test_influence_bounded_and_decaying(poisson, spec, alpha):
    L = np.arange(0, 401, 8)
    r = alpha_influence(spec, poisson, 7.0, alpha, L)
    assert np.all(np.isfinite(r.curve))
    assert np.max(np.abs(r.curve)) < 5
    assert abs(r.curve[-1]) < 0.25 / alpha * 0.05


def test_influence_validation(poisson):
    with pytest.raises(ValueError):
        alpha_influence(HD, poisson, 7.0, 0.0, [1])
    with pytest.raises(ValueError):
        influence_limit_check(HD, poisson, 7.0, 3, [0.1, 0.01])
    with pytest.raises(ValueError):
        influence_limit_check(HD, poisson, 7.0, 3, [0.001, 0.01])


@pytest.mark.parametrize("spec, tol", [(HD, 0.15), (NED, 0.05)], ids=["HD", "NED"])
def test_influence_limit_at_L20(poisson, spec, tol):
    # the linear regime needs alpha well below p_20(7) ~ 3e-5
    seq = influence_limit_check(spec, poisson, 7.0, 20, [1e-3, 1e-4, 1e-5, 1e-6])
    assert np.all(np.diff(seq) > 0)
    assert seq[-1] == pytest.approx(13.0, abs=tol)


@pytest.mark.parametrize("spec", [LD, HD, NED], ids=lambda s: s.name)
def test_influence_limit_at_L7_and_L0(poisson, spec):
    seq = influence_limit_check(spec, poisson, 7.0, 7, [1e-2, 1e-3, 1e-4])
    np.testing.assert_allclose(seq, 0.0, atol=1e-4)
    seq0 = influence_limit_check(spec, poisson, 7.0, 0, [1e-4, 1e-5, 1e-6])
    assert seq0[-1] == pytest.approx(-7.0, abs=0.01)


def test_ld_influence_at_L0_is_exact(poisson):
    seq = influence_limit_check(LD, poisson, 7.0, 0, [0.05, 0.01, 1e-3, 1e-4])
    np.testing.assert_allclose(seq, -7.0, atol=1e-4)


# -- potential bias -----------------------------------------------------------

def test_ld_potential_bias(poisson):
    assert potential_bias(LD, poisson, 7.0, -1e-4, 0) == pytest.approx(7e-4, abs=1e-6)
    assert potential_bias(LD, poisson, 7.0, 0.1, 12) == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("L, alpha, hd, ned", MPMATH_RATIOS)
def test_relative_bias_matches_high_precision(poisson, L, alpha, hd, ned):
    assert relative_bias(HD, poisson, 7.0, alpha, L) == pytest.approx(hd, rel=1e-6)
    assert relative_bias(NED, poisson, 7.0, alpha, L) == pytest.approx(ned, rel=1e-6)


def test_inliers_beyond_bound_are_rejected(poisson):
    with pytest.raises(InvalidContaminationError):
        potential_bias(HD, poisson, 7.0, -0.001, 0)


def test_functional_at_model_is_computed(poisson):
    clean = functional(HD, poisson, contaminated_model(poisson, 7.0, 0.0, 20))
    assert clean == pytest.approx(7.0, abs=1e-9)


# -- affinity and breakdown ---------------------------------------------------

def test_affinity(poisson):
    p = poisson.pmf_at(7.0)
    assert hellinger_affinity(p, p) == pytest.approx(1.0, abs=1e-12)
    assert hellinger_affinity(Pmf.point_mass(0), Pmf.point_mass(3)) == 0.0
    q = contaminate(p, ContaminationSpec(0.5, 20))
    K = q.K
    brute = sum(math.sqrt(q.padded(K)[k] * p.padded(K)[k]) for k in range(K + 1))
    brute += math.sqrt(q.tail_mass * p.tail_mass)
    assert 0 < hellinger_affinity(q, p) < 1
    assert hellinger_affinity(q, p) == pytest.approx(brute, rel=1e-12)


def test_breakdown_bound_sanity(poisson):
    best, edge, bound = hellinger_breakdown_bound(poisson, poisson.pmf_at(7.0))
    assert best == pytest.approx(1.0, abs=1e-9)
    assert 0 < edge < 0.1
    assert bound == pytest.approx((1 - edge) ** 2 / (1 + (1 - edge) ** 2), rel=1e-9)
    # with the affinity at infinity taken as zero the threshold is exactly 1/2
    assert best ** 2 / (1 + best ** 2) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("spec", [HD, NED], ids=lambda s: s.name)
def test_breakdown_probe_robust(poisson, spec):
    r = breakdown_probe(spec, poisson, 7.0, 0.2)
    assert r.within_domain
    assert abs(r.estimates[-1] - 7.0) < 0.05
    assert np.all(np.abs(r.estimates - 7.0) < 0.05)
    assert not r.near_ties.any()


def test_breakdown_probe_ld_tracks_mean(poisson):
    r = breakdown_probe(LD, poisson, 7.0, 0.2, (25, 50, 100))
    expected = [ld_functional_poisson(7.0, 0.2, L) for L in (25, 50, 100)]
    np.testing.assert_allclose(r.estimates, expected, atol=1e-5)
    assert np.all(np.diff(r.estimates) > 0)


def test_breakdown_probe_validation(poisson):
    with pytest.raises(ValueError):
        breakdown_probe(HD, poisson, 7.0, 0.5)
    with pytest.raises(ValueError):
        breakdown_probe(HD, poisson, 7.0, 0.2, (50, 25))


def _mp_functional(which, q, theta_guess):
    """Root of the Poisson estimating equation at high precision (mpmath)."""
    import mpmath as mp

    K = len(q) - 1

    def eq(theta):
        total = mp.mpf(0)
        for k in range(K + 1):
            p = mp.exp(-theta) * theta**k / mp.factorial(k)
            u = k / theta - 1
            if which == "HD":
                total += u * mp.sqrt(q[k] * p)
            else:
                total += u * (p - (p + q[k]) * mp.exp(1 - q[k] / p))
        return total

    return mp.findroot(eq, theta_guess, tol=mp.mpf(10) ** -35)


def test_frozen_ratios_against_mpmath():
    import mpmath as mp

    mp.mp.dps = 40
    theta0, L, alpha = mp.mpf(7), 8, mp.mpf("-0.01")
    K = 150
    base = [mp.exp(-theta0) * theta0**k / mp.factorial(k) for k in range(K + 1)]
    dirty = [(1 - alpha) * b for b in base]
    dirty[L] += alpha
    ld_bias = alpha * (L - theta0)
    for which, frozen in (("HD", 1.01956639802), ("NED", 0.99942951553)):
        clean_t = _mp_functional(which, base, theta0)
        dirty_t = _mp_functional(which, dirty, theta0 + ld_bias)
        assert float((dirty_t - clean_t) / ld_bias) == pytest.approx(frozen, rel=1e-10)
