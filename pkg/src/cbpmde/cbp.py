"""
Simulation of controlled branching processes with full family-tree records.

Generation ``l`` has ``Z_l`` individuals; the control law picks
``phi_l(Z_l)`` progenitors, each of which reproduces independently from
the offspring law. The tree keeps ``counts[l, k]``, the number of
generation-``l`` progenitors with exactly ``k`` children.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import SubcriticalScheduleError

# Horizon schedule anchors: (growth rate, generations) at both ends.
_SCHEDULE_FAST = (4.8, 8)
_SCHEDULE_SLOW = (1.05, 65)


def _trim_columns(counts):
    nonzero = np.flatnonzero(counts.any(axis=0)) if counts.size else np.array([], int)
    width = int(nonzero[-1]) + 1 if nonzero.size else 1
    return counts[:, :width]


@dataclass(frozen=True, eq=False)
class FamilyTree:
    """
    Complete record of a process observed up to generation ``n``.

    ``z`` has ``n + 1`` entries, ``phi`` and the rows of ``counts`` have ``n``.
    Trailing all-zero columns of ``counts`` are dropped so equal trees
    compare equal regardless of how wide the sampler's support was.
    """

    z: np.ndarray
    phi: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=np.int64).reshape(-1)
        phi = np.array(self.phi, dtype=np.int64).reshape(-1)
        counts = np.array(self.counts, dtype=np.int64)
        n = phi.size
        if counts.size == 0:
            counts = np.zeros((n, 1), dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != n or z.size != n + 1:
            raise ValueError(
                f"shape mismatch: z has {z.size}, phi {n}, counts {counts.shape}"
            )
        if (z < 0).any() or (phi < 0).any() or (counts < 0).any():
            raise ValueError("tree entries must be nonnegative")
        k = np.arange(counts.shape[1])
        if not np.array_equal(counts @ k, z[1:]):
            raise ValueError("offspring bookkeeping broken: Z_{l+1} != sum_k k Z_l(k)")
        if not np.array_equal(counts.sum(axis=1), phi):
            raise ValueError("progenitor bookkeeping broken: sum_k Z_l(k) != phi_l")
        counts = _trim_columns(counts)
        for arr in (z, phi, counts):
            arr.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "counts", counts)

    @property
    def n(self):
        return self.phi.size

    @property
    def k_max(self):
        return self.counts.shape[1] - 1

    @property
    def survived(self):
        return bool(self.z[-1] > 0)

    def up_to(self, n):
        """The same tree observed only up to generation ``n``."""
        if not 0 <= n <= self.n:
            raise ValueError(f"generation {n} outside 0..{self.n}")
        return FamilyTree(self.z[: n + 1], self.phi[:n], self.counts[:n])

    def __eq__(self, other):
        if not isinstance(other, FamilyTree):
            return NotImplemented
        return (np.array_equal(self.z, other.z) and np.array_equal(self.phi, other.phi)
                and np.array_equal(self.counts, other.counts))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TreeTotals:
    delta: int
    y: np.ndarray


def totals(tree):
    """Total progenitors and progenitors by offspring count over all generations."""
    y = tree.counts.sum(axis=0)
    return TreeTotals(int(tree.phi.sum()), y)


def simulate(offspring, control, z0, n, seed=None):
    """
    Simulate ``n`` generations starting from ``z0`` individuals.

    Parameters
    ----------
    offspring : Pmf
        Offspring law; its tail mass is folded into the last support point.
    control : ControlSpec
    z0, n : int
    seed : int, sequence of int, or numpy Generator

    Returns
    -------
    FamilyTree
    """
    if n < 1:
        raise ValueError("need at least one generation")
    if z0 < 0:
        raise ValueError("z0 must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    pvals = np.array(offspring.probs, dtype=float)
    pvals[-1] += offspring.tail_mass
    pvals /= pvals.sum()

    z = np.zeros(n + 1, dtype=np.int64)
    phi = np.zeros(n, dtype=np.int64)
    counts = np.zeros((n, pvals.size), dtype=np.int64)
    k = np.arange(pvals.size)
    z[0] = z0
    for l in range(n):
        phi[l] = control.sample(int(z[l]), rng)
        if phi[l] > 0:
            # the histogram of phi i.i.d. draws is multinomial
            counts[l] = rng.multinomial(phi[l], pvals)
        z[l + 1] = counts[l] @ k
    return FamilyTree(z, phi, counts)


def generations_for_rate(tau_m):
    """
    Observation horizon for a model with asymptotic mean growth rate ``tau_m``.

    Interpolates linearly in ``log(tau_m)`` between 8 generations at 4.8 and
    65 at 1.05, rounds up, and clamps to ``[8, 65]``.
    """
    if not tau_m > 1:
        raise SubcriticalScheduleError(f"tau_m={tau_m!r} is not supercritical")
    (t_fast, n_fast), (t_slow, n_slow) = _SCHEDULE_FAST, _SCHEDULE_SLOW
    frac = (math.log(tau_m) - math.log(t_slow)) / (math.log(t_fast) - math.log(t_slow))
    gens = n_slow + frac * (n_fast - n_slow)
    gens = math.ceil(round(gens, 9))
    return int(min(max(gens, n_fast), n_slow))
