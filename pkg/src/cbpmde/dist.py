"""
Offspring laws on the nonnegative integers.

A :class:`Pmf` is a truncated probability mass function: explicit masses
for ``k = 0..K`` plus the mass beyond ``K`` carried as ``tail_mass``.
Parametric families map a real parameter to such a pmf and also provide
the first and second parameter derivatives of every mass, which the
disparity gradients and the influence calculations need.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .errors import DomainError, InvalidContaminationError, UndefinedScoreError

#: Absolute slack allowed on total mass.
NORMALIZATION_TOL = 1e-9

#: Default truncation target for model tail mass.
TAIL_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Pmf:
    """Finite-support pmf on ``0..K`` with the remaining mass in ``tail_mass``."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float, copy=True).reshape(-1)
        if probs.size == 0:
            raise ValueError("a Pmf needs at least one mass point")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError("masses must be finite and nonnegative")
        tail = float(self.tail_mass)
        if not (0.0 <= tail <= 1.0):
            raise ValueError(f"tail_mass must lie in [0, 1], got {tail!r}")
        total = math.fsum(probs) + tail
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", tail)

    @property
    def K(self):
        """Largest explicitly stored support point."""
        return self.probs.size - 1

    def padded(self, K):
        """Masses on ``0..K``; zeros past the stored support."""
        if K < self.K:
            raise ValueError(f"cannot pad a pmf with K={self.K} down to {K}")
        out = np.zeros(K + 1)
        out[: self.probs.size] = self.probs
        return out

    def mean(self):
        """Mean of the explicit part (the tail is ignored)."""
        return float(np.dot(np.arange(self.probs.size), self.probs))

    def support(self):
        return np.flatnonzero(self.probs > 0)

    def l1_distance(self, other):
        K = max(self.K, other.K)
        return float(np.abs(self.padded(K) - other.padded(K)).sum()
                     + abs(self.tail_mass - other.tail_mass))

    @classmethod
    def point_mass(cls, k):
        probs = np.zeros(int(k) + 1)
        probs[int(k)] = 1.0
        return cls(probs)

    def __repr__(self):
        return f"Pmf(K={self.K}, mean={self.mean():.6g}, tail_mass={self.tail_mass:.3g})"


class OffspringFamily:
    """
    A one-parameter family ``theta -> p(theta)`` on a closed interval.

    Subclasses implement ``masses``, ``deriv_at``, ``second_deriv_at`` and
    ``truncation``. All three mass functions accept an integer array ``k``.
    """

    name = "family"
    theta_lo = -math.inf
    theta_hi = math.inf

    @property
    def theta_domain(self):
        return (self.theta_lo, self.theta_hi)

    def check_theta(self, theta):
        if not (self.theta_lo <= theta <= self.theta_hi):
            raise DomainError(
                f"theta={theta!r} outside [{self.theta_lo}, {self.theta_hi}] for {self.name}"
            )

    def masses(self, theta, k):
        raise NotImplementedError

    def deriv_at(self, theta, k):
        raise NotImplementedError

    def second_deriv_at(self, theta, k):
        raise NotImplementedError

    def tail(self, theta, K):
        """Mass strictly above ``K``."""
        return max(0.0, 1.0 - math.fsum(self.masses(theta, np.arange(K + 1))))

    def tail_deriv(self, theta, K):
        """Derivative in theta of the mass above ``K``."""
        return -math.fsum(self.deriv_at(theta, np.arange(K + 1)))

    def truncation(self, theta, eps=TAIL_EPS):
        raise NotImplementedError

    def pmf_at(self, theta, K=None):
        self.check_theta(theta)
        if K is None:
            K = self.truncation(theta)
        if K < 0:
            raise ValueError("K must be nonnegative")
        probs = self.masses(theta, np.arange(K + 1))
        return Pmf(probs, self.tail(theta, K))

    def score(self, theta, k):
        """``d/dtheta log p_k(theta)``; raises where the mass vanishes."""
        k = np.asarray(k)
        p = self.masses(theta, k)
        if np.any(p == 0):
            raise UndefinedScoreError(f"p_k({theta}) = 0 for some k in {k!r}")
        return self.deriv_at(theta, k) / p

    def fisher_information(self, theta, K=None):
        self.check_theta(theta)
        if K is None:
            K = self.truncation(theta)
        k = np.arange(K + 1)
        p = self.masses(theta, k)
        keep = p > 0
        return float(np.sum(self.score(theta, k[keep]) ** 2 * p[keep]))


@dataclass(frozen=True)
class PoissonFamily(OffspringFamily):
    """Poisson offspring law parametrized by its mean."""

    theta_lo: float = 0.1
    theta_hi: float = 30.0
    name = "poisson"

    def masses(self, theta, k):
        k = np.asarray(k, dtype=float)
        return np.exp(k * math.log(theta) - theta - gammaln(k + 1))

    def deriv_at(self, theta, k):
        k = np.asarray(k, dtype=float)
        return self.masses(theta, k) * (k / theta - 1.0)

    def second_deriv_at(self, theta, k):
        k = np.asarray(k, dtype=float)
        return self.masses(theta, k) * ((k / theta - 1.0) ** 2 - k / theta**2)

    def score(self, theta, k):
        # closed form; Poisson masses never vanish analytically
        return np.asarray(k, dtype=float) / theta - 1.0

    def fisher_information(self, theta, K=None):
        """``1/theta`` exactly; with ``K`` given, the sum truncated at ``K``."""
        if K is None:
            self.check_theta(theta)
            return 1.0 / theta
        return super().fisher_information(theta, K)

    def tail(self, theta, K):
        return float(stats.poisson.sf(K, theta))

    def tail_deriv(self, theta, K):
        # d/dtheta P[X > K] = p_K(theta) for the Poisson law
        return float(self.masses(theta, K))

    def truncation(self, theta, eps=TAIL_EPS):
        K = int(stats.poisson.isf(eps, theta))
        while stats.poisson.sf(K, theta) >= eps:
            K += 1
        return K


@dataclass(frozen=True)
class ControlSpec:
    """
    Control law for the number of progenitors given a population size.

    ``poisson_rate`` draws Poisson(rate * k); ``deterministic`` uses
    floor(rate * k).
    """

    law: str = "poisson_rate"
    rate: float = 0.3

    def __post_init__(self):
        if self.law not in ("poisson_rate", "deterministic"):
            raise ValueError(f"unknown control law {self.law!r}")
        if self.rate < 0:
            raise ValueError("control rate must be nonnegative")

    def mean(self, k):
        if self.law == "poisson_rate":
            return self.rate * k
        return float(math.floor(self.rate * k))

    def variance(self, k):
        return self.rate * k if self.law == "poisson_rate" else 0.0

    @property
    def tau(self):
        return self.rate

    def sample(self, k, rng):
        if self.law == "poisson_rate":
            return int(rng.poisson(self.rate * k))
        return int(math.floor(self.rate * k))


@dataclass(frozen=True)
class ContaminationSpec:
    """Gross-error mixture ``(1 - alpha) p + alpha * point_mass(L)``; alpha < 0 gives inliers."""

    alpha: float
    L: int

    def __post_init__(self):
        if not (-1.0 < self.alpha < 1.0):
            raise InvalidContaminationError(f"alpha must lie in (-1, 1), got {self.alpha!r}")
        if int(self.L) != self.L or self.L < 0:
            raise InvalidContaminationError(f"L must be a nonnegative integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))


def min_inlier_alpha(p_L):
    """Most negative alpha keeping the mixture a pmf when the mass at L is ``p_L``."""
    return -p_L / (1.0 - p_L)


def pmf_at(family, theta, K=None):
    return family.pmf_at(theta, K)


def score(family, theta, k):
    return family.score(theta, k)


def fisher_information(family, theta, K=None):
    return family.fisher_information(theta, K)


def contaminate(base, spec):
    """Mix ``base`` with a point mass at ``spec.L``."""
    a, L = spec.alpha, spec.L
    K = max(base.K, L)
    probs = (1.0 - a) * base.padded(K)
    probs[L] += a
    if probs[L] < 0:
        # boundary alpha = -p_L/(1-p_L) may round a hair below zero
        if probs[L] < -1e-15:
            raise InvalidContaminationError(
                f"alpha={a!r} removes more than the mass {base.padded(K)[L]!r} at L={L}"
            )
        probs[L] = 0.0
    return Pmf(probs, (1.0 - a) * base.tail_mass)


def tau_m_contaminated(theta0, lam, spec):
    """Asymptotic mean growth rate of the contaminated Poisson model."""
    return lam * ((1.0 - spec.alpha) * theta0 + spec.alpha * spec.L)
