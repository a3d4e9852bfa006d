"""
Minimum disparity estimation: ``T(q) = argmin_theta rho(q, theta)`` on a compact interval.

The minimizer is located by a coarse scan of the whole interval, refined
by golden-section search inside the best bracketing triple, and, when the
gradient is defined and changes sign across the final bracket, polished by
a bracketed root search on the analytic gradient. Function comparisons
alone cannot place the minimizer much closer than ~1e-8 because the
objective is flat to machine precision there; the polish recovers the
remaining digits needed for small-contamination bias ratios.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .disparity import _gradient_from_cells, _model_cells, evaluation_K
from .errors import GradientUndefinedError, NoFiniteValueError
from .npmle import npmle

GRID_SIZE = 256
THETA_TOL = 1e-8
NEAR_TIE_TOL = 1e-6
TIE_RTOL = 1e-12  # grid values this close to the minimum count as tied

_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class MdeResult:
    theta_hat: float
    value: float
    stationarity: float
    iterations: int
    bracket: float
    near_tie: bool = False
    polished: bool = False

    @property
    def converged(self):
        return self.bracket <= THETA_TOL


@lru_cache(maxsize=64)
def _grid_cells(family, K, grid_size):
    grid = np.linspace(family.theta_lo, family.theta_hi, grid_size)
    cells = [_model_cells(family, t, K)[0] for t in grid]
    return grid, np.vstack(cells)


class _Objective:
    """``rho(q, .)`` and its gradient for one fixed data pmf."""

    def __init__(self, spec, family, q, K=None):
        self.spec, self.family = spec, family
        self.K = evaluation_K(family, q) if K is None else K
        self.qv = np.append(q.padded(self.K), q.tail_mass)

    def value(self, theta):
        p, _ = _model_cells(self.family, theta, self.K)
        return float(np.sum(self.spec.cell_value(self.qv, p)))

    def gradient(self, theta):
        p, dp = _model_cells(self.family, theta, self.K)
        return _gradient_from_cells(self.spec, self.qv, p, dp)

    def scan(self, grid_size):
        grid, P = _grid_cells(self.family, self.K, grid_size)
        return grid, self.spec.cell_value(self.qv[None, :], P).sum(axis=1)


def _golden(f, a, b, tol):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol:
        it += 1
        if fc <= fd:  # ties move left
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return a, b, it


def _polish(obj, a, b, lo, hi):
    """Root of the gradient near ``[a, b]``, or None when there is no sign change."""
    pad = 1e-6
    a, b = max(lo, a - pad), min(hi, b + pad)
    try:
        ga, gb = obj.gradient(a), obj.gradient(b)
    except GradientUndefinedError:
        return None
    if not (ga < 0 < gb):
        return None
    return brentq(obj.gradient, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def minimize(spec, family, q, grid_size=GRID_SIZE, tol=THETA_TOL, polish=True):
    """
    Minimum disparity functional of ``q`` over the family's parameter interval.

    Ties on the coarse grid go to the smallest theta. Raises
    :class:`NoFiniteValueError` when the disparity is infinite at every
    grid point.
    """
    obj = _Objective(spec, family, q)
    lo, hi = family.theta_domain
    grid, vals = obj.scan(grid_size)
    finite = np.isfinite(vals)
    if not finite.any():
        raise NoFiniteValueError(f"{spec.name} disparity is infinite over the whole grid")
    vmin = np.min(vals[finite])
    # first (smallest-theta) grid point tied with the minimum up to rounding
    i = int(np.argmax(finite & (vals <= vmin + TIE_RTOL * (1 + abs(vmin)))))
    far = np.abs(np.arange(grid.size) - i) > 1
    near_tie = bool(np.any(far & finite & (vals - vmin <= NEAR_TIE_TOL)))

    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]

    def f(t):
        v = obj.value(t)
        return v if not math.isnan(v) else math.inf

    a, b, iterations = _golden(f, a, b, tol)
    theta = 0.5 * (a + b)
    polished = False
    if polish:
        root = _polish(obj, a, b, lo, hi)
        if root is not None and f(root) <= f(theta) + 1e-15 * (1 + abs(f(theta))):
            theta, polished = root, True
    theta = min(max(theta, lo), hi)
    try:
        stationarity = abs(obj.gradient(theta))
    except GradientUndefinedError:
        stationarity = math.nan
    return MdeResult(float(theta), obj.value(theta), float(stationarity), iterations, float(b - a),
                     near_tie, polished)


def mde_from_tree(spec, family, tree, **kwargs):
    """Minimum disparity estimate from the tree's nonparametric offspring estimate."""
    return minimize(spec, family, npmle(tree), **kwargs)
