"""
Robustness of minimum disparity functionals under gross-error contamination.

Everything here works on exact (population-level) pmfs: the model
``p(theta)`` mixed with a point mass at ``L``. No sampling is involved.
"""

from dataclasses import dataclass

import numpy as np

from .disparity import HD, LD, aligned
from .dist import ContaminationSpec, contaminate
from .mde import minimize


@dataclass(frozen=True, eq=False)
class InfluenceReport:
    alpha: float
    L_values: np.ndarray
    curve: np.ndarray
    limit_curve: np.ndarray


@dataclass(frozen=True, eq=False)
class BreakdownReport:
    alpha: float
    L_values: np.ndarray
    estimates: np.ndarray
    near_ties: np.ndarray

    @property
    def within_domain(self):
        return bool(np.all(np.isfinite(self.estimates)))


def contaminated_model(family, theta, alpha, L):
    """``p(theta, alpha, L)`` on a support wide enough for every parameter in the domain."""
    K = max(family.truncation(family.theta_hi), int(L))
    return contaminate(family.pmf_at(theta, K), ContaminationSpec(alpha, L))


def functional(spec, family, q):
    """``T(q)`` as a bare float."""
    return minimize(spec, family, q).theta_hat


def influence_limit(family, theta, L):
    """Small-contamination limit ``p'_L / (I p_L)`` of the alpha-influence curve."""
    return float(family.score(theta, np.asarray([L]))[0] / family.fisher_information(theta))


def alpha_influence(spec, family, theta, alpha, L_values):
    """Scaled estimator shift ``(T(p(theta, alpha, L)) - theta) / alpha`` for each ``L``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    family.check_theta(theta)
    L_values = np.asarray(L_values, dtype=int)
    curve = np.array([
        (functional(spec, family, contaminated_model(family, theta, alpha, L)) - theta) / alpha
        for L in L_values
    ])
    info = family.fisher_information(theta)
    limit = family.score(theta, L_values) / info
    return InfluenceReport(alpha, L_values, curve, np.asarray(limit, dtype=float))


def influence_limit_check(spec, family, theta, L, alphas):
    """
    alpha-influence at a single ``L`` along a decreasing sequence of alphas.

    The last entry should approach :func:`influence_limit`; how small alpha
    must be depends on ``p_L(theta)``, since the linear regime needs
    ``alpha`` well below the model mass at ``L``.
    """
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0) or np.any(alphas > 0.05):
        raise ValueError("alphas must lie in (0, 0.05]")
    if np.any(np.diff(alphas) >= 0):
        raise ValueError("alphas must be strictly decreasing")
    return np.array([
        (functional(spec, family, contaminated_model(family, theta, a, L)) - theta) / a
        for a in alphas
    ])


def potential_bias(spec, family, theta0, alpha, L):
    """``T(p(theta0, alpha, L)) - T(p(theta0))``; negative alpha models inliers."""
    clean = functional(spec, family, contaminated_model(family, theta0, 0.0, L))
    dirty = functional(spec, family, contaminated_model(family, theta0, alpha, L))
    return dirty - clean


def relative_bias(spec, family, theta0, alpha, L, reference=None):
    """Potential bias of ``spec`` divided by that of the likelihood disparity."""
    reference = LD if reference is None else reference
    return (potential_bias(spec, family, theta0, alpha, L)
            / potential_bias(reference, family, theta0, alpha, L))


def hellinger_affinity(q, model):
    """``sum_k sqrt(q_k p_k)``, in ``[0, 1]``."""
    qv, pv = aligned(q, model)
    return float(min(1.0, np.sum(np.sqrt(qv * pv))))


def hellinger_breakdown_bound(family, q):
    """
    Contamination level below which the Hellinger functional cannot break down at ``q``.

    Returns ``(best_affinity, edge_affinity, bound)``; the affinity at infinity is
    replaced by the larger affinity at the two ends of the parameter interval.
    """
    best = hellinger_affinity(q, family.pmf_at(functional(HD, family, q), _eval_K(family, q)))
    edge = max(hellinger_affinity(q, family.pmf_at(t, _eval_K(family, q)))
               for t in family.theta_domain)
    gap2 = (best - edge) ** 2
    return best, edge, gap2 / (1 + gap2)


def _eval_K(family, q):
    return max(q.K, family.truncation(family.theta_hi))


def breakdown_probe(spec, family, theta, alpha, L_schedule=(25, 50, 100, 200, 400)):
    """Functional value under alpha-contamination at increasingly distant ``L``."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    L_schedule = np.asarray(L_schedule, dtype=int)
    if np.any(np.diff(L_schedule) <= 0):
        raise ValueError("L_schedule must be increasing")
    results = [minimize(spec, family, contaminated_model(family, theta, alpha, L))
               for L in L_schedule]
    return BreakdownReport(
        alpha,
        L_schedule,
        np.array([r.theta_hat for r in results]),
        np.array([r.near_tie for r in results]),
    )


def ld_functional_poisson(theta, alpha, L):
    """Closed form of the likelihood-disparity functional for Poisson: the mixture mean."""
    return (1 - alpha) * theta + alpha * L


__all__ = [
    "InfluenceReport", "BreakdownReport", "contaminated_model", "functional",
    "influence_limit", "alpha_influence", "influence_limit_check", "potential_bias",
    "relative_bias", "hellinger_affinity", "hellinger_breakdown_bound",
    "breakdown_probe", "ld_functional_poisson",
]
