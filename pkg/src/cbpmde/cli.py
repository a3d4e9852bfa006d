"""
Command-line front end.

Every command writes its outputs plus a ``manifest.json`` into an output
directory (``--out``, or ``$CBPMDE_OUTPUT_DIR``). Exit codes: 0 success,
2 usage or malformed input, 3 I/O failure, 4 estimation impossible.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .cbp import FamilyTree, simulate, totals
from .disparity import DISPARITIES, get_disparity
from .dist import ControlSpec, Pmf, PoissonFamily
from .errors import CBPError, NoProgenitorsError, TreeFormatError
from .mc import EFFICIENCY_PAIRS, ExperimentConfig, efficiency_series, grid_report, run_experiment
from .mde import mde_from_tree
from .robust import alpha_influence, relative_bias

OUTPUT_ENV = "CBPMDE_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_ESTIMATION = 0, 2, 3, 4

CONFIG_KEYS = {
    "theta0", "lambda", "z0", "replications", "seed", "alphas", "l_values",
    "disparities", "n_max", "workers",
}

# inlier levels of the relative-bias tables, per gross-error location
BIAS_TABLE_ALPHAS = {
    0: [-0.0001, -0.0002, -0.0003, -0.0004, -0.0005, -0.0006, -0.0007, -0.0008, -0.0009],
    8: [-0.01, -0.02, -0.03, -0.04, -0.05, -0.06, -0.07, -0.08, -0.09],
    20: [-0.0000075, -0.0000100, -0.0000125, -0.0000150, -0.0000175,
         -0.0000200, -0.0000225, -0.0000250, -0.0000275],
}

TREE_HEADER = ["generation", "Z", "phi", "offspring_counts"]


class UsageError(Exception):
    pass


def fmt(x):
    """Round-trip decimal text for CSV/JSON cells."""
    if x is None:
        return ""
    if isinstance(x, (bool, str)):
        return str(x)
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


# -- family tree CSV -----------------------------------------------------------

def tree_to_csv(tree):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TREE_HEADER)
    for l in range(tree.n):
        pairs = [f"{k}:{c}" for k, c in enumerate(tree.counts[l]) if c]
        w.writerow([l, int(tree.z[l]), int(tree.phi[l]), *pairs])
    w.writerow([tree.n, int(tree.z[-1]), ""])
    return buf.getvalue()


def _int_field(text, what, line):
    try:
        v = int(text)
    except ValueError:
        raise TreeFormatError(f"{what} {text!r} is not an integer", line) from None
    if v < 0:
        raise TreeFormatError(f"{what} must be nonnegative, got {v}", line)
    return v


def tree_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0][:3]] != TREE_HEADER[:3]:
        raise TreeFormatError("header must start with generation,Z,phi", 1)
    z, phi, counts = [], [], []
    body = [(i, r) for i, r in enumerate(rows[1:], start=2) if any(c.strip() for c in r)]
    if not body:
        raise TreeFormatError("no generations", 2)
    for pos, (line, row) in enumerate(body):
        if len(row) < 2:
            raise TreeFormatError("expected at least generation and Z", line)
        if _int_field(row[0], "generation", line) != pos:
            raise TreeFormatError(f"expected generation {pos}", line)
        z.append(_int_field(row[1], "Z", line))
        last = pos == len(body) - 1
        phi_text = row[2].strip() if len(row) > 2 else ""
        if last:
            if phi_text or any(c.strip() for c in row[3:]):
                raise TreeFormatError("final generation carries only Z", line)
            continue
        phi.append(_int_field(phi_text, "phi", line))
        hist = {}
        for cell in row[3:]:
            if not cell.strip():
                continue
            k, sep, c = cell.partition(":")
            if not sep:
                raise TreeFormatError(f"offspring count {cell!r} is not k:count", line)
            hist[_int_field(k, "k", line)] = _int_field(c, "count", line)
        counts.append(hist)
    width = max((max(h) for h in counts if h), default=0) + 1
    mat = [[h.get(k, 0) for k in range(width)] for h in counts]
    try:
        return FamilyTree(z, phi, mat if mat else [[0]] * 0)
    except ValueError as exc:
        raise TreeFormatError(str(exc)) from None


# -- output plumbing -----------------------------------------------------------

class Outputs:
    """Collects files for one invocation and writes them with a manifest."""

    def __init__(self, directory, command, config):
        self.dir = Path(directory)
        self.command = command
        self.config = config
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def add_csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
        self.add(name, buf.getvalue())

    def add_json(self, name, obj):
        self.add(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def write(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        sums = {}
        for name, text in self.files.items():
            data = text.encode()
            (self.dir / name).write_bytes(data)
            sums[name] = hashlib.sha256(data).hexdigest()
        manifest = {
            "command": self.command,
            "config": self.config,
            "seed_base": self.config.get("seed"),
            "version": __version__,
            "outputs": sums,
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _out_dir(args, required=True):
    out = args.out or os.environ.get(OUTPUT_ENV)
    if not out and required:
        raise UsageError(f"--out is required (or set {OUTPUT_ENV})")
    return out


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ints(text):
    """Comma list of integers; ``a:b`` expands to ``a..b-1``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                lo, hi = part.split(":")
                out.extend(range(int(lo), int(hi)))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")
    return out


def _disparity_names(choice):
    return list(DISPARITIES) if choice == "all" else [choice.upper()]


# -- commands ------------------------------------------------------------------

def _simulated_tree(args):
    family = PoissonFamily()
    if args.point_mass is not None:
        offspring = Pmf.point_mass(args.point_mass)
    else:
        offspring = family.pmf_at(args.theta0)
    control = ControlSpec(args.control, args.lam)
    return simulate(offspring, control, args.z0, args.gens, args.seed)


def _sim_config(args):
    return {
        "theta0": args.theta0, "lambda": args.lam, "z0": args.z0, "gens": args.gens,
        "seed": args.seed, "control": args.control, "point_mass": args.point_mass,
    }


def cmd_simulate(args):
    out = Outputs(_out_dir(args), "simulate", _sim_config(args))
    out.add("tree.csv", tree_to_csv(_simulated_tree(args)))
    out.write()
    return EXIT_OK


def cmd_estimate(args):
    if args.tree:
        try:
            text = Path(args.tree).read_text()
        except OSError as exc:
            print(f"error: cannot read {args.tree}: {exc}", file=sys.stderr)
            return EXIT_IO
        tree = tree_from_csv(text)
        config = {"tree": str(args.tree)}
    else:
        tree = _simulated_tree(args)
        config = _sim_config(args)
    config["disparity"] = args.disparity
    family = PoissonFamily()
    tot = totals(tree)
    records = []
    try:
        for name in _disparity_names(args.disparity):
            r = mde_from_tree(get_disparity(name), family, tree)
            records.append({
                "disparity": name,
                "theta_hat": r.theta_hat,
                "value": r.value,
                "stationarity": None if math.isnan(r.stationarity) else r.stationarity,
                "iterations": r.iterations,
                "bracket": r.bracket,
                "near_tie": r.near_tie,
                "polished": r.polished,
            })
    except NoProgenitorsError as exc:
        print(json.dumps({"error": "estimation_impossible", "reason": "no_progenitors",
                          "detail": str(exc)}))
        return EXIT_ESTIMATION
    doc = {"generations": tree.n, "delta": tot.delta, "final_size": int(tree.z[-1]),
           "estimates": records}
    directory = _out_dir(args, required=False)
    if directory is None:
        print(json.dumps(doc, indent=2, sort_keys=True))
        return EXIT_OK
    out = Outputs(directory, "estimate", config)
    out.add_json("estimate.json", doc)
    out.write()
    return EXIT_OK


def cmd_influence(args):
    family = PoissonFamily()
    names = _disparity_names(args.disparity)
    rows = []
    for alpha in args.alphas:
        for name in names:
            rep = alpha_influence(get_disparity(name), family, args.theta0, alpha, args.l_values)
            rows += [(alpha, name, int(L), c, lim)
                     for L, c, lim in zip(rep.L_values, rep.curve, rep.limit_curve)]
    out = Outputs(_out_dir(args), "influence",
                  {"theta0": args.theta0, "alphas": args.alphas, "l_values": args.l_values,
                   "disparity": args.disparity})
    out.add_csv("influence.csv", ["alpha", "disparity", "L", "curve", "limit_curve"], rows)
    out.write()
    return EXIT_OK


def bias_table(theta0, L, alphas, family=None):
    family = family or PoissonFamily()
    hd, ned = get_disparity("HD"), get_disparity("NED")
    return [(a, relative_bias(hd, family, theta0, a, L), relative_bias(ned, family, theta0, a, L))
            for a in alphas]


def cmd_bias_tables(args):
    out = Outputs(_out_dir(args), "bias-tables", {"theta0": args.theta0})
    for L, alphas in BIAS_TABLE_ALPHAS.items():
        out.add_csv(f"bias_L{L}.csv", ["alpha", "HD_over_LD", "NED_over_LD"],
                    bias_table(args.theta0, L, alphas))
    out.write()
    return EXIT_OK


def _experiment_config(args, with_cells):
    values = {
        "theta0": args.theta0, "lambda": args.lam, "z0": args.z0,
        "replications": args.replications, "seed": args.seed, "n_max": args.n_max,
        "workers": args.workers, "disparities": args.disparities,
        "alphas": args.alphas, "l_values": args.l_values,
    }
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        bad = sorted(set(loaded) - CONFIG_KEYS)
        if bad:
            raise UsageError(f"invalid config keys: {', '.join(bad)}")
        # explicit flags win over the file
        values = {**loaded, **{k: v for k, v in values.items() if v is not None}}
    values = {k: v for k, v in values.items() if v is not None}
    kwargs = dict(
        theta0=values.get("theta0", 7.0), lam=values.get("lambda", 0.3),
        z0=values.get("z0", 1), replications=values.get("replications", 100),
        seed_base=values.get("seed", 20160), n_max=values.get("n_max", 10),
        workers=values.get("workers", 1),
        disparities=tuple(values.get("disparities", ("LD", "HD", "NED"))),
    )
    if with_cells:
        if "alphas" in values:
            kwargs["alphas"] = tuple(values["alphas"])
        if "l_values" in values:
            kwargs["l_values"] = tuple(values["l_values"])
    else:
        kwargs["alphas"] = ()
    try:
        config = ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    echo = {"theta0": config.theta0, "lambda": config.lam, "z0": config.z0,
            "replications": config.replications, "seed": config.seed_base,
            "n_max": config.n_max, "disparities": list(config.disparities),
            "alphas": list(config.alphas), "l_values": list(config.l_values)}
    return config, echo


def cmd_grid(args):
    config, echo = _experiment_config(args, with_cells=True)
    directory = _out_dir(args)
    rows = grid_report(run_experiment(config))
    names = list(config.disparities)
    header = (["alpha", "L", "tau_m", "horizon", "n_estimated", "n_extinct", "n_inestimable"]
              + [f"mean_{d}" for d in names] + [f"mse_{d}" for d in names] + ["best"])
    out = Outputs(directory, "grid", echo)
    out.add_csv("grid.csv", header, [
        (r.alpha, r.L, r.tau_m, r.horizon, r.n_estimated, r.n_extinct, r.n_inestimable,
         *(r.mean[d] for d in names), *(r.mse[d] for d in names), r.best)
        for r in rows
    ])
    out.write()
    return EXIT_OK


def cmd_efficiency(args):
    config, echo = _experiment_config(args, with_cells=False)
    directory = _out_dir(args)
    rows = efficiency_series(run_experiment(config))
    header = ["generation", "n_common"] + [f"mse_{a}_over_{b}" for a, b in EFFICIENCY_PAIRS]
    out = Outputs(directory, "efficiency", echo)
    out.add_csv("efficiency.csv", header, rows)
    out.write()
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def _add_sim_flags(p, required_out):
    p.add_argument("--theta0", type=float, default=7.0, help="Poisson offspring mean")
    p.add_argument("--lambda", dest="lam", type=float, default=0.3, help="control rate")
    p.add_argument("--control", choices=["poisson_rate", "deterministic"], default="poisson_rate")
    p.add_argument("--point-mass", type=int, default=None,
                   help="use a point mass at this offspring count instead of Poisson")
    p.add_argument("--z0", type=int, default=1)
    p.add_argument("--gens", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def _add_experiment_flags(p):
    p.add_argument("--config", help="JSON file with keys " + ", ".join(sorted(CONFIG_KEYS)))
    p.add_argument("--theta0", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--z0", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--disparities", type=lambda s: [x.upper() for x in s.split(",")])
    p.add_argument("--alphas", type=_floats)
    p.add_argument("--l-values", type=_ints)
    p.add_argument("--out")


def build_parser():
    parser = argparse.ArgumentParser(prog="cbpmde", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one family tree")
    _add_sim_flags(p, True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="minimum disparity estimates from a tree")
    p.add_argument("--tree", help="tree CSV written by 'simulate'")
    _add_sim_flags(p, False)
    p.add_argument("--disparity", choices=["ld", "hd", "ned", "all"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("influence", help="alpha-influence curves")
    p.add_argument("--theta0", type=float, default=7.0)
    p.add_argument("--alphas", type=_floats, default=[0.05, 0.2])
    p.add_argument("--l-values", type=_ints, default=list(range(41)))
    p.add_argument("--disparity", choices=["ld", "hd", "ned", "all"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=cmd_influence)

    p = sub.add_parser("bias-tables", help="inlier relative-bias tables at L = 0, 8, 20")
    p.add_argument("--theta0", type=float, default=7.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bias_tables)

    p = sub.add_parser("grid", help="Monte Carlo over the contamination grid")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("efficiency", help="per-generation MSE ratios, uncontaminated model")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_efficiency)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, TreeFormatError) as exc:
        print(f"cbpmde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoProgenitorsError as exc:
        print(json.dumps({"error": "estimation_impossible", "reason": "no_progenitors",
                          "detail": str(exc)}))
        return EXIT_ESTIMATION
    except OSError as exc:
        print(f"cbpmde {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CBPError as exc:
        print(f"cbpmde {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
