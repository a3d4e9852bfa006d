"""
Monte Carlo experiments on simulated family trees.

The uncontaminated model is simulated for ``n_max`` generations and
estimated at every generation, which feeds the relative-efficiency curves
and the normality check. Each contaminated cell ``(alpha, L)`` is
simulated from the mixture offspring law up to a horizon chosen from the
cell's mean growth rate and estimated once, at that horizon.

Replication ``i`` of cell ``c`` draws from ``default_rng([seed_base + i, c])``
(the baseline is cell 0), so results do not depend on the number of
workers or on which other cells are run.
"""

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .cbp import generations_for_rate, simulate
from .disparity import get_disparity
from .dist import ContaminationSpec, ControlSpec, Pmf, PoissonFamily, contaminate, tau_m_contaminated
from .errors import CBPError, DegenerateRatioError, EmptySampleError
from .mde import mde_from_tree

GRID_ALPHAS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
GRID_L_VALUES = tuple(range(26))

# (numerator, denominator) pairs for the efficiency curves
EFFICIENCY_PAIRS = (("HD", "NED"), ("LD", "HD"), ("LD", "NED"))


@dataclass(frozen=True)
class ExperimentConfig:
    theta0: float = 7.0
    lam: float = 0.3
    z0: int = 1
    n_max: int = 10
    replications: int = 100
    disparities: tuple = ("LD", "HD", "NED")
    alphas: tuple = GRID_ALPHAS
    l_values: tuple = GRID_L_VALUES
    seed_base: int = 20160
    include_baseline: bool = True
    control_law: str = "poisson_rate"
    family: PoissonFamily = field(default_factory=PoissonFamily)
    workers: int = 1
    offspring: Optional[Pmf] = None  # overrides family.pmf_at(theta0) as the simulated law

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        for a in self.alphas:
            if not -1 < a < 1:
                raise ValueError(f"alpha {a!r} outside (-1, 1)")
        for L in self.l_values:
            if int(L) != L or L < 0:
                raise ValueError(f"L={L!r} is not a nonnegative integer")
        object.__setattr__(self, "disparities", tuple(d.upper() for d in self.disparities))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "l_values", tuple(int(L) for L in self.l_values))
        for d in self.disparities:
            get_disparity(d)

    @property
    def control(self):
        return ControlSpec(self.control_law, self.lam)

    def offspring_law(self):
        return self.family.pmf_at(self.theta0) if self.offspring is None else self.offspring

    def cells(self):
        return [(a, L) for a in self.alphas for L in self.l_values]


@dataclass(frozen=True, eq=False)
class BaselineResult:
    """Uncontaminated replications estimated at every generation 1..n_max.

    Arrays are indexed ``[replication, generation - 1]``; estimates are NaN
    where the process is extinct at that generation or estimation failed.
    """

    survived: np.ndarray
    delta: np.ndarray
    estimates: dict
    failed: np.ndarray


@dataclass(frozen=True, eq=False)
class CellResult:
    alpha: float
    L: int
    tau_m: float
    horizon: int
    survived: np.ndarray
    delta: np.ndarray
    estimates: dict
    failed: np.ndarray

    @property
    def n_estimated(self):
        return int(np.sum(self.survived & ~self.failed))

    @property
    def n_extinct(self):
        return int(np.sum(~self.survived))

    @property
    def n_inestimable(self):
        return int(np.sum(self.survived & self.failed))


@dataclass(frozen=True, eq=False)
class ReplicationSet:
    config: ExperimentConfig
    baseline: BaselineResult
    cells: dict


def _estimate(tree, names, family):
    out, failed = {}, False
    for name in names:
        try:
            out[name] = mde_from_tree(get_disparity(name), family, tree).theta_hat
        except CBPError:
            out[name], failed = np.nan, True
    return out, failed


def _baseline_replication(config, i):
    rng = np.random.default_rng([config.seed_base + i, 0])
    offspring = config.offspring_law()
    tree = simulate(offspring, config.control, config.z0, config.n_max, rng)
    rows = []
    for n in range(1, config.n_max + 1):
        sub = tree.up_to(n)
        if sub.z[-1] > 0:
            est, failed = _estimate(sub, config.disparities, config.family)
        else:
            est, failed = {d: np.nan for d in config.disparities}, False
        rows.append((bool(sub.z[-1] > 0), int(sub.phi.sum()), est, failed))
    return rows


def _cell_replication(config, cell_index, alpha, L, horizon, i):
    rng = np.random.default_rng([config.seed_base + i, cell_index])
    offspring = contaminate(config.offspring_law(), ContaminationSpec(alpha, L))
    tree = simulate(offspring, config.control, config.z0, horizon, rng)
    if tree.z[-1] == 0:
        return False, int(tree.phi.sum()), {d: np.nan for d in config.disparities}, False
    est, failed = _estimate(tree, config.disparities, config.family)
    return True, int(tree.phi.sum()), est, failed


def _run_task(task):
    kind, args = task
    return _baseline_replication(*args) if kind == "base" else _cell_replication(*args)


def _map(tasks, workers):
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def run_experiment(config):
    """Simulate and estimate every replication of the baseline and of each grid cell."""
    N = config.replications
    names = config.disparities
    tasks = []
    if config.include_baseline:
        tasks += [("base", (config, i)) for i in range(N)]
    cell_meta = []
    for c, (alpha, L) in enumerate(config.cells(), start=1):
        tau = tau_m_contaminated(config.theta0, config.lam, ContaminationSpec(alpha, L))
        horizon = generations_for_rate(tau)
        cell_meta.append((alpha, L, tau, horizon))
        tasks += [("cell", (config, c, alpha, L, horizon, i)) for i in range(N)]
    results = _map(tasks, config.workers)

    baseline = None
    pos = 0
    if config.include_baseline:
        rows = results[:N]
        pos = N
        baseline = BaselineResult(
            survived=np.array([[r[0] for r in rep] for rep in rows]),
            delta=np.array([[r[1] for r in rep] for rep in rows], dtype=np.int64),
            estimates={d: np.array([[r[2][d] for r in rep] for rep in rows]) for d in names},
            failed=np.array([[r[3] for r in rep] for rep in rows]),
        )
    cells = {}
    for alpha, L, tau, horizon in cell_meta:
        rows = results[pos:pos + N]
        pos += N
        cells[(alpha, L)] = CellResult(
            alpha, L, tau, horizon,
            survived=np.array([r[0] for r in rows]),
            delta=np.array([r[1] for r in rows], dtype=np.int64),
            estimates={d: np.array([r[2][d] for r in rows]) for d in names},
            failed=np.array([r[3] for r in rows]),
        )
    return ReplicationSet(config, baseline, cells)


def mse(estimates, theta0):
    """Mean squared deviation of the estimates from ``theta0``."""
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise EmptySampleError("MSE of an empty sample")
    return float(np.mean((est - theta0) ** 2))


def _pairwise(a, b):
    keep = np.isfinite(a) & np.isfinite(b)
    return a[keep], b[keep]


def relative_efficiency(rset, pair, n):
    """``MSE(pair[0]) / MSE(pair[1])`` at generation ``n`` over commonly estimable runs."""
    a_name, b_name = pair
    col = n - 1
    a, b = _pairwise(rset.baseline.estimates[a_name][:, col],
                     rset.baseline.estimates[b_name][:, col])
    if a.size == 0:
        raise EmptySampleError(f"no replication estimable by both {pair} at n={n}")
    theta0 = rset.config.theta0
    den = mse(b, theta0)
    if den == 0:
        raise DegenerateRatioError(f"MSE({b_name}) is zero at n={n}")
    return mse(a, theta0) / den


def efficiency_series(rset, pairs=EFFICIENCY_PAIRS):
    """Rows ``(n, n_common, ratio per pair)`` for n = 1..n_max; NaN where undefined."""
    rows = []
    for n in range(1, rset.config.n_max + 1):
        ratios = []
        for pair in pairs:
            try:
                ratios.append(relative_efficiency(rset, pair, n))
            except (EmptySampleError, DegenerateRatioError):
                ratios.append(np.nan)
        common = np.isfinite(np.column_stack(
            [rset.baseline.estimates[d][:, n - 1] for d in rset.config.disparities]
        )).all(axis=1).sum()
        rows.append((n, int(common), *ratios))
    return rows


@dataclass(frozen=True, eq=False)
class NormalitySummary:
    values: np.ndarray
    mean: float
    variance: float
    ks_statistic: float
    ks_pvalue: float
    non_normal: bool

    @property
    def size(self):
        return self.values.size


def standardized_errors(estimates, delta, theta0, fisher_info):
    """``sqrt(Delta) * (theta_hat - theta0) * sqrt(I(theta0))``."""
    return np.sqrt(np.asarray(delta, float)) * (np.asarray(estimates, float) - theta0) * np.sqrt(fisher_info)


def normality_diagnostic(rset, family, theta0, spec, n=None, min_size=30):
    """
    Standardized estimation errors among survivors at generation ``n`` (default: last).

    The errors should look standard normal. ``non_normal`` is set for a
    zero sample variance or a Kolmogorov-Smirnov p-value below 0.01.
    """
    name = spec if isinstance(spec, str) else spec.name
    col = (rset.config.n_max if n is None else n) - 1
    est = rset.baseline.estimates[name][:, col]
    keep = np.isfinite(est)
    z = standardized_errors(est[keep], rset.baseline.delta[keep, col], theta0,
                            family.fisher_information(theta0))
    return summarize_standardized(z, min_size=min_size)


def summarize_standardized(z, min_size=30):
    z = np.asarray(z, dtype=float)
    if z.size == 0:
        raise EmptySampleError("no surviving replications")
    if z.size < min_size:
        warnings.warn(f"only {z.size} survivors; normality summary is unreliable",
                      RuntimeWarning, stacklevel=2)
    var = float(np.var(z, ddof=1)) if z.size > 1 else 0.0
    if var > 0:
        ks = stats.kstest(z, "norm")
        stat, pval = float(ks.statistic), float(ks.pvalue)
    else:
        stat, pval = 1.0, 0.0
    return NormalitySummary(z, float(np.mean(z)), var, stat, pval, var == 0 or pval < 0.01)


@dataclass(frozen=True)
class GridRow:
    alpha: float
    L: int
    tau_m: float
    horizon: int
    n_estimated: int
    n_extinct: int
    n_inestimable: int
    mean: dict
    mse: dict
    best: str


def _summarize(alpha, L, tau, horizon, estimates, n_est, n_ext, n_inest, theta0):
    names = list(estimates)
    cols = np.column_stack([estimates[d] for d in names])
    keep = np.isfinite(cols).all(axis=1)
    means, mses = {}, {}
    for j, d in enumerate(names):
        vals = cols[keep, j]
        means[d] = float(np.mean(vals)) if vals.size else np.nan
        mses[d] = mse(vals, theta0) if vals.size else np.nan
    finite = {d: v for d, v in mses.items() if np.isfinite(v)}
    best = min(finite, key=finite.get) if finite else ""
    return GridRow(alpha, L, tau, horizon, n_est, n_ext, n_inest, means, mses, best)


def grid_report(rset):
    """Per-cell means, MSEs and best disparity; the baseline (alpha=0) row comes first."""
    cfg = rset.config
    rows = []
    if rset.baseline is not None:
        col = cfg.n_max - 1
        surv = rset.baseline.survived[:, col]
        failed = rset.baseline.failed[:, col]
        rows.append(_summarize(
            0.0, None, cfg.theta0 * cfg.lam, cfg.n_max,
            {d: v[:, col] for d, v in rset.baseline.estimates.items()},
            int(np.sum(surv & ~failed)), int(np.sum(~surv)), int(np.sum(surv & failed)),
            cfg.theta0,
        ))
    for (alpha, L), cell in rset.cells.items():
        rows.append(_summarize(alpha, L, cell.tau_m, cell.horizon, cell.estimates,
                               cell.n_estimated, cell.n_extinct, cell.n_inestimable, cfg.theta0))
    return rows
