"""Batch command-line front end.

Subcommands: fit (point estimation), select (penalized variable selection),
sweep (BIC tuning-parameter scan) and simulate (Monte Carlo cells).  All
reports are JSON on stdout; --out additionally writes files.  Exit codes:
0 success, 2 input or schema error, 3 numerical failure.

Dataset CSV schema: header row "y,delta,x1,...,xp"; a missing response is an
empty y cell with delta = 0; UTF-8, '.' decimal, comma separator.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .el import lambda_approx
from .errors import CsvSchemaError, EstimationError
from .estimators import fit_a1, fit_a2, fit_l1, fit_l2, pilot_estimate
from .inference import bic_sweep, el_ratio, empirical_tau, wilks_test
from .kernels import Kernel
from .model import Dataset, ModelConfig, PenaltyConfig
from .simulate import SimConfig, preset_config, run_monte_carlo

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# dataset CSV

def read_dataset(path):
    """Parse a dataset CSV; raises CsvSchemaError on any schema violation."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CsvSchemaError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise CsvSchemaError("empty file")
    header = [c.strip() for c in rows[0]]
    if len(header) < 3 or header[0] != "y" or header[1] != "delta":
        raise CsvSchemaError("header must be y,delta,x1,...,xp")
    p = len(header) - 2
    expected = [f"x{j}" for j in range(1, p + 1)]
    if header[2:] != expected:
        raise CsvSchemaError("covariate columns must be named x1..xp in order")
    ys, deltas, xs = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != p + 2:
            raise CsvSchemaError(f"line {lineno}: expected {p + 2} fields")
        y_cell = row[0].strip()
        try:
            delta = int(row[1])
            x = [float(v) for v in row[2:]]
        except ValueError:
            raise CsvSchemaError(f"line {lineno}: malformed number") from None
        if delta not in (0, 1):
            raise CsvSchemaError(f"line {lineno}: delta must be 0 or 1")
        if delta == 1:
            if not y_cell:
                raise CsvSchemaError(f"line {lineno}: delta=1 needs a y value")
            try:
                y = float(y_cell)
            except ValueError:
                raise CsvSchemaError(f"line {lineno}: malformed y") from None
            if not np.isfinite(y):
                raise CsvSchemaError(f"line {lineno}: y must be finite")
        else:
            if y_cell:
                raise CsvSchemaError(f"line {lineno}: delta=0 needs an empty y")
            y = np.nan
        ys.append(y)
        deltas.append(delta)
        xs.append(x)
    if not xs:
        raise CsvSchemaError("no data rows")
    try:
        return Dataset(np.array(xs), np.array(ys), np.array(deltas))
    except ValueError as exc:
        raise CsvSchemaError(str(exc)) from None


def write_dataset(path, ds):
    """Write a dataset CSV with full float round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "delta"] + [f"x{j}" for j in range(1, ds.p + 1)])
        for i in range(ds.n):
            y_cell = repr(float(ds.y[i])) if ds.delta[i] == 1 else ""
            writer.writerow([y_cell, int(ds.delta[i])]
                            + [repr(float(v)) for v in ds.X[i]])


# ---------------------------------------------------------------------------
# shared option plumbing

def _add_model_flags(sub):
    sub.add_argument("--tau", default="0.5",
                     help="expectile level in (0,1), or 'auto' for the "
                          "empirical rule (default 0.5)")
    sub.add_argument("--h", type=float, default=None,
                     help="bandwidth (default n^(-1/4))")
    sub.add_argument("--kernel", default="epanechnikov",
                     choices=("epanechnikov", "quartic", "triweight"))
    sub.add_argument("--nu", type=float, default=1e-2,
                     help="outer stopping tolerance")
    sub.add_argument("--eps-zero", type=float, default=1e-4,
                     help="coefficient-zeroing threshold")
    sub.add_argument("--max-iter", type=int, default=200)
    sub.add_argument("--alpha", type=float, default=0.05)
    sub.add_argument("--standardize", action="store_true",
                     help="center and scale covariates before fitting")
    sub.add_argument("--out", default=None, help="directory for report files")
    sub.add_argument("--config", default=None,
                     help="flat key=value file; flags override its values")


def _add_penalty_flags(sub):
    sub.add_argument("--eta", type=float, default=None,
                     help="penalty level (default n^(-5/6))")
    sub.add_argument("--gamma", type=float, default=2.5,
                     help="adaptive weight power")
    sub.add_argument("--pilot", default="same", choices=("same", "split"),
                     help="pilot estimate from the same data or a half split")


def _load_config_defaults(argv, parser):
    # expand --config file entries into flag tokens placed right after the
    # subcommand, so explicit flags (parsed later) override them
    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    injected = []
    try:
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CsvSchemaError(f"config line without '=': {line!r}")
            key, value = line.split("=", 1)
            flag = "--" + key.strip().replace("_", "-")
            value = value.strip()
            if value.lower() in ("true", "yes"):
                injected.append(flag)
            else:
                injected.extend([flag, value])
    except OSError as exc:
        raise CsvSchemaError(f"cannot read config {path}: {exc}") from None
    # insert after the subcommand token (first non-flag argument)
    for i, tok in enumerate(argv):
        if not tok.startswith("-"):
            return argv[: i + 1] + injected + argv[i + 1:]
    return argv + injected


def _standardize(ds):
    center = ds.X.mean(axis=0)
    scale = ds.X.std(axis=0)
    if np.any(scale == 0.0):
        raise CsvSchemaError("constant covariate cannot be standardized")
    X = (ds.X - center) / scale
    return Dataset(X, ds.y, ds.delta), center, scale


def _resolve_tau(args, ds):
    if str(args.tau).lower() == "auto":
        return float(empirical_tau(ds.y[ds.delta == 1])), True
    tau = float(args.tau)
    return tau, False


def _model_config(args, tau):
    return ModelConfig(tau=tau, h=args.h, kernel=Kernel(args.kernel),
                       nu=float(args.nu), eps_zero=float(args.eps_zero),
                       max_iter=int(args.max_iter))


def _emit(report, out_dir, name):
    text = json.dumps(report, indent=2)
    print(text)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _common_report(args, ds, tau, tau_auto):
    rep = {
        "schema_version": SCHEMA_VERSION,
        "n": ds.n, "p": ds.p, "n_complete": ds.n_complete,
        "tau": tau, "tau_auto": tau_auto,
        "h": args.h if args.h is not None else float(ds.n) ** -0.25,
        "kernel": args.kernel,
    }
    return rep


# ---------------------------------------------------------------------------
# subcommands

def cmd_fit(args):
    ds = read_dataset(args.data)
    transform = None
    if args.standardize:
        ds, center, scale = _standardize(ds)
        transform = {"center": center.tolist(), "scale": scale.tolist()}
    tau, tau_auto = _resolve_tau(args, ds)
    cfg = _model_config(args, tau)
    fit = {"a1": fit_a1, "a2": fit_a2}[args.algorithm](ds, cfg)
    lam = lambda_approx(ds, cfg, fit.beta)
    report = _common_report(args, ds, tau, tau_auto)
    report.update({
        "command": "fit",
        "algorithm": args.algorithm,
        "beta": fit.beta.tolist(),
        "lambda": lam.tolist(),
        "iterations": fit.iterations,
        "converged": fit.converged,
        "ratio_at_beta": el_ratio(ds, cfg, fit.beta),
        "standardized": transform,
    })
    if args.test_beta is not None:
        hyp = np.array([float(v) for v in args.test_beta.split(",")])
        if hyp.shape != (ds.p,):
            raise CsvSchemaError("--test-beta needs p comma-separated values")
        t = wilks_test(ds, cfg, hyp, alpha=args.alpha)
        report["wilks_test"] = _test_dict(t, hyp)
    _emit(report, args.out, "fit_report.json")
    return EXIT_OK


def _test_dict(t, hyp):
    return {
        "hypothesis": np.asarray(hyp, dtype=float).tolist(),
        "statistic": t.statistic, "df": t.df, "critical": t.critical,
        "pvalue": t.pvalue, "reject": t.reject, "alpha": t.alpha,
    }


def cmd_select(args):
    ds = read_dataset(args.data)
    transform = None
    if args.standardize:
        ds, center, scale = _standardize(ds)
        transform = {"center": center.tolist(), "scale": scale.tolist()}
    tau, tau_auto = _resolve_tau(args, ds)
    cfg = _model_config(args, tau)
    eta = args.eta if args.eta is not None else float(ds.n) ** (-5.0 / 6.0)
    pilot = pilot_estimate(ds, cfg, mode=args.pilot)
    pen = PenaltyConfig(eta=eta, gamma=args.gamma, pilot=pilot)
    fit = {"l1": fit_l1, "l2": fit_l2}[args.algorithm](ds, cfg, pen)
    active = fit.active_set
    report = _common_report(args, ds, tau, tau_auto)
    report.update({
        "command": "select",
        "algorithm": args.algorithm,
        "eta": eta, "gamma": args.gamma, "pilot_mode": args.pilot,
        "pilot": pilot.tolist(),
        "beta": fit.beta.tolist(),
        "active_set": (active + 1).tolist(),  # 1-based, matching x1..xp
        "iterations": fit.iterations,
        "converged": fit.converged,
        "standardized": transform,
    })
    if len(active):
        t = wilks_test(ds, cfg, fit.beta, alpha=args.alpha, support=active)
        report["submodel_wilks_test"] = _test_dict(t, fit.beta)
        report["submodel_wilks_test"]["df_note"] = "df = |active set|"
    _emit(report, args.out, "select_report.json")
    return EXIT_OK


def cmd_sweep(args):
    ds = read_dataset(args.data)
    if args.standardize:
        ds, _, _ = _standardize(ds)
    tau, tau_auto = _resolve_tau(args, ds)
    cfg = _model_config(args, tau)
    exponent = {"n56": -5.0 / 6.0, "n67": -6.0 / 7.0}[args.grid_form]
    if args.a_values:
        a_values = [float(v) for v in args.a_values.split(",")]
    else:
        a_values = list(np.arange(args.a_min, args.a_max + 0.5 * args.a_step,
                                  args.a_step))
    scale = float(ds.n) ** exponent
    grid = [a * scale for a in a_values]
    best, records = bic_sweep(ds, cfg, args.gamma, grid, pilot_mode=args.pilot)
    rows = []
    for a, rec in zip(a_values, [r for r in records]):
        rows.append([repr(a), repr(rec.eta), repr(rec.bic),
                     " ".join(str(j + 1) for j in rec.active_set),
                     " ".join(repr(v) for v in rec.beta)])
    report = _common_report(args, ds, tau, tau_auto)
    report.update({
        "command": "sweep",
        "grid_form": args.grid_form,
        "a_values": a_values,
        "gamma": args.gamma,
        "records": [
            {"a": a, "eta": rec.eta, "bic": rec.bic,
             "active_set": (rec.active_set + 1).tolist(),
             "beta": rec.beta.tolist()}
            for a, rec in zip(a_values, records)
        ],
        "best": {"eta": best.eta, "bic": best.bic,
                 "active_set": (best.active_set + 1).tolist(),
                 "beta": best.beta.tolist()},
    })
    _emit(report, args.out, "sweep_report.json")
    if args.out:
        _write_csv(Path(args.out) / "sweep_records.csv",
                   ["a", "eta", "bic", "active_set", "beta"], rows)
    return EXIT_OK


def cmd_simulate(args):
    overrides = {}
    if args.n is not None:
        overrides["n"] = args.n
    if args.p is not None:
        overrides["p"] = args.p
    if args.beta0 is not None:
        overrides["beta0"] = np.array([float(v) for v in args.beta0.split(",")])
        overrides.setdefault("p", len(overrides["beta0"]))
    if args.design:
        overrides["design"] = args.design
    if args.errors:
        overrides["errors"] = args.errors
    if args.missing:
        overrides["missing"] = args.missing
    if args.pi is not None:
        overrides["pi"] = args.pi
    if args.reps is not None:
        overrides["replications"] = args.reps
    if args.algorithms:
        overrides["algorithms"] = tuple(args.algorithms.split(","))
    if args.eta is not None:
        overrides["eta"] = args.eta
    if args.h is not None:
        overrides["h"] = args.h
    if str(args.tau).lower() not in ("auto", "default"):
        overrides["tau"] = float(args.tau)
    overrides.update({
        "gamma": args.gamma, "alpha": args.alpha, "seed": args.seed,
        "kernel": args.kernel, "nu": args.nu, "eps_zero": args.eps_zero,
        "max_iter": args.max_iter, "pilot_mode": args.pilot,
    })
    if args.preset:
        sc = preset_config(args.preset, **overrides)
    else:
        required = {"n", "p", "beta0"}
        if not required <= set(overrides):
            raise CsvSchemaError("without --preset, --n, --p and --beta0 "
                                 "are required")
        sc = SimConfig(**overrides)

    report = run_monte_carlo(sc, workers=args.workers)
    _emit(report.to_json_dict(), args.out, "sim_report.json")
    if args.out:
        out = Path(args.out)
        _write_csv(out / "sim_cells.csv", report.csv_header(),
                   [report.csv_row()])
        if args.dump:
            from .simulate import _generate_dataset

            write_dataset(out / "sim_dump.csv", _generate_dataset(sc, 0))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(
        prog="seel",
        description="Smoothed expectile empirical-likelihood estimation, "
                    "variable selection, inference and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit the unpenalized estimator")
    p_fit.add_argument("data", help="dataset CSV path")
    p_fit.add_argument("--algorithm", default="a2", choices=("a1", "a2"))
    p_fit.add_argument("--test-beta", default=None,
                       help="comma-separated hypothesis vector for a Wilks test")
    _add_model_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_sel = sub.add_parser("select", help="penalized variable selection")
    p_sel.add_argument("data", help="dataset CSV path")
    p_sel.add_argument("--algorithm", default="l2", choices=("l1", "l2"))
    _add_penalty_flags(p_sel)
    _add_model_flags(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_sw = sub.add_parser("sweep", help="BIC scan over the tuning parameter")
    p_sw.add_argument("data", help="dataset CSV path")
    p_sw.add_argument("--grid-form", default="n56", choices=("n56", "n67"),
                      help="eta = a*n^(-5/6) or a*n^(-6/7)")
    p_sw.add_argument("--a-min", type=float, default=1.0)
    p_sw.add_argument("--a-max", type=float, default=8.0)
    p_sw.add_argument("--a-step", type=float, default=1.0)
    p_sw.add_argument("--a-values", default=None,
                      help="explicit comma-separated multipliers (overrides range)")
    _add_penalty_flags(p_sw)
    _add_model_flags(p_sw)
    p_sw.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo cell")
    p_sim.add_argument("--preset", default=None,
                       choices=("table1", "table1-caption", "table2",
                                "fig-coverage", "fig-selection"))
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--p", type=int, default=None)
    p_sim.add_argument("--beta0", default=None,
                       help="comma-separated true coefficients")
    p_sim.add_argument("--design", default=None, choices=("d1", "d2"))
    p_sim.add_argument("--errors", default=None,
                       choices=("normal", "shifted_exp"))
    p_sim.add_argument("--missing", default=None,
                       choices=("complete", "constant", "covariate"))
    p_sim.add_argument("--pi", type=float, default=None)
    p_sim.add_argument("--reps", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--algorithms", default=None,
                       help="comma-separated subset of a1,a2,l1,l2")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.add_argument("--dump", action="store_true",
                       help="also write replication 0 as a dataset CSV")
    p_sim.add_argument("--eta", type=float, default=None)
    p_sim.add_argument("--gamma", type=float, default=2.5)
    p_sim.add_argument("--pilot", default="split", choices=("same", "split"))
    p_sim.add_argument("--tau", default="default",
                       help="expectile level, or 'default' for the error-law rule")
    p_sim.add_argument("--h", type=float, default=None)
    p_sim.add_argument("--kernel", default="epanechnikov",
                       choices=("epanechnikov", "quartic", "triweight"))
    p_sim.add_argument("--nu", type=float, default=1e-2)
    p_sim.add_argument("--eps-zero", type=float, default=1e-4)
    p_sim.add_argument("--max-iter", type=int, default=200)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--config", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        argv = _load_config_defaults(argv, parser)
        args = parser.parse_args(argv)
    except CsvSchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (CsvSchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EstimationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
