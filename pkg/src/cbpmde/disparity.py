"""
Disparity measures between a data pmf ``q`` and a model pmf ``p(theta)``.

A disparity is ``rho(q, theta) = sum_k G(delta_k) p_k(theta)`` with the
Pearson residual ``delta_k = q_k / p_k(theta) - 1`` and ``G`` strictly
convex with ``G(0) = 0``. Three are provided: likelihood disparity (LD),
squared Hellinger distance (HD) and negative exponential disparity (NED).

Every cell term is evaluated in a form that stays finite as the model mass
goes to zero, so that support mismatches take their analytic limits:

========  ==============================  ===========================
name      contribution when p_k = 0 < q_k  contribution when q_k = 0
========  ==============================  ===========================
LD        +inf                             0
HD        q_k                              p_k
NED       0                                (e - 1) p_k
========  ==============================  ===========================

Truncated pmfs are compared on ``0..K`` plus one lumped cell holding both
tail masses.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GradientUndefinedError


# -- G, G' and standardized residual adjustment functions ---------------------

def _ld_g(d):
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > -1, (d + 1) * np.log1p(d), 0.0)


def _ld_g_prime(d):
    return np.log1p(np.asarray(d, dtype=float)) + 1.0


def _hd_g(d):
    return (np.sqrt(np.asarray(d, dtype=float) + 1) - 1) ** 2


def _hd_g_prime(d):
    s = np.sqrt(np.asarray(d, dtype=float) + 1)
    return (s - 1) / s


def _ned_g(d):
    return np.exp(-np.asarray(d, dtype=float)) - 1


def _ned_g_prime(d):
    return -np.exp(-np.asarray(d, dtype=float))


def _ld_raf(d):
    return np.asarray(d, dtype=float)


def _hd_raf(d):
    return 2 * (np.sqrt(np.asarray(d, dtype=float) + 1) - 1)


def _ned_raf(d):
    d = np.asarray(d, dtype=float)
    return 2 - (2 + d) * np.exp(-d)


# -- per-cell terms, stable in the p -> 0 limit -------------------------------
# cell_value(q, p) = G(delta) p ; cell_raf(q, p) = p * A(delta) for the RAF up to scale and
# shift. A shift adds a multiple of sum_k p'_k = 0 to the gradient, so any shift will do.

def _ld_cell_value(q, p):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = q * (np.log(q) - np.log(p))
    out = np.where(q > 0, out, 0.0)
    return np.where((q > 0) & (p == 0), np.inf, out)


def _ld_cell_raf(q, p):
    return np.where((q > 0) & (p == 0), np.inf, q - p)


def _hd_cell_value(q, p):
    return (np.sqrt(q) - np.sqrt(p)) ** 2


def _hd_cell_raf(q, p):
    return np.sqrt(q * p) - p


def _ned_cell_value(q, p):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = p * np.exp(1 - q / p) - p
    return np.where(p > 0, out, 0.0)


def _ned_cell_raf(q, p):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = p - (p + q) * np.exp(1 - q / p)
    return np.where(p > 0, out, 0.0)


@dataclass(frozen=True)
class DisparitySpec:
    """
    A disparity measure and its metadata.

    ``raf`` is the standardized residual adjustment function (``A(0) = 0``,
    ``A'(0) = 1``). It relates to the raw one by
    ``raf(d) = raf_scale * ((d + 1) G'(d) - G(d)) + raf_shift``.
    """

    name: str
    g: Callable
    g_prime: Callable
    raf: Callable
    raf_scale: float
    raf_shift: float
    zero_model_mass_rule: str
    bounded_G: bool
    bounded_A_family: bool
    cell_value: Callable
    cell_raf: Callable

    @property
    def g_at_minus_one(self):
        return float(self.g(-1.0))

    def __repr__(self):
        return f"DisparitySpec({self.name})"


LD = DisparitySpec(
    name="LD", g=_ld_g, g_prime=_ld_g_prime, raf=_ld_raf, raf_scale=1.0, raf_shift=-1.0,
    zero_model_mass_rule="inf", bounded_G=False, bounded_A_family=False,
    cell_value=_ld_cell_value, cell_raf=_ld_cell_raf,
)

HD = DisparitySpec(
    name="HD", g=_hd_g, g_prime=_hd_g_prime, raf=_hd_raf, raf_scale=2.0, raf_shift=0.0,
    zero_model_mass_rule="q", bounded_G=False, bounded_A_family=False,
    cell_value=_hd_cell_value, cell_raf=_hd_cell_raf,
)

# values use G = exp(-d) - 1; the standardized RAF is that of exp(-d) - 2
NED = DisparitySpec(
    name="NED", g=_ned_g, g_prime=_ned_g_prime, raf=_ned_raf, raf_scale=1.0, raf_shift=1.0,
    zero_model_mass_rule="zero", bounded_G=True, bounded_A_family=True,
    cell_value=_ned_cell_value, cell_raf=_ned_cell_raf,
)

DISPARITIES = {"LD": LD, "HD": HD, "NED": NED}


def get_disparity(name):
    try:
        return DISPARITIES[name.upper()]
    except KeyError:
        raise ValueError(f"unknown disparity {name!r}; choose from {sorted(DISPARITIES)}") from None


def aligned(q, model):
    """Both pmfs on a common support ``0..K`` plus a final lumped-tail cell."""
    K = max(q.K, model.K)
    qv = np.append(q.padded(K), q.tail_mass)
    pv = np.append(model.padded(K), model.tail_mass)
    return qv, pv


def pearson_residual(q, model, k):
    """``q_k / p_k - 1``; ``inf`` where the model has no mass but ``q`` does."""
    K = max(q.K, model.K, k)
    qk, pk = q.padded(K)[k], model.padded(K)[k]
    if pk == 0:
        return math.inf if qk > 0 else 0.0
    return qk / pk - 1.0


def pearson_residuals(q, model):
    qv, pv = aligned(q, model)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = qv / pv - 1
    d = np.where(pv > 0, d, np.where(qv > 0, np.inf, 0.0))
    return d[:-1]


def disparity_value(spec, q, model):
    """``sum_k G(delta_k) p_k``; may be ``inf`` for LD."""
    qv, pv = aligned(q, model)
    return float(np.sum(spec.cell_value(qv, pv)))


def evaluation_K(family, q, thetas=None):
    """Truncation point covering ``q`` and the model tail at every theta probed."""
    if thetas is None:
        thetas = [family.theta_hi]
    return max(q.K, *(family.truncation(t) for t in thetas))


def _model_cells(family, theta, K):
    """Masses, score and derivative on ``0..K`` plus the lumped tail cell."""
    k = np.arange(K + 1)
    p = family.masses(theta, k)
    dp = family.deriv_at(theta, k)
    p_tail = family.tail(theta, K)
    dp_tail = family.tail_deriv(theta, K)
    return np.append(p, p_tail), np.append(dp, dp_tail)


def disparity_gradient(spec, family, q, theta, K=None):
    """
    Derivative in theta of :func:`disparity_value` at ``p(theta)``.

    Computed as ``-sum_k p'_k(theta) A(delta_k)`` with the unscaled RAF
    ``(delta + 1) G'(delta) - G(delta)``; the standardized RAF differs by
    ``raf_scale`` only, which does not move the stationary points.
    """
    if K is None:
        K = evaluation_K(family, q, [theta])
    qv = np.append(q.padded(K), q.tail_mass)
    p, dp = _model_cells(family, theta, K)
    return _gradient_from_cells(spec, qv, p, dp)


def _gradient_from_cells(spec, qv, p, dp):
    w = spec.cell_raf(qv, p)
    if np.isinf(w).any():
        raise GradientUndefinedError(
            f"{spec.name} gradient diverges: model has zero mass where q is positive"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(p > 0, dp / p, 0.0)
    return float(-np.sum(u * w))
