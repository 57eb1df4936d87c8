"""Command-line front end.

Subcommands: simulate, metrics, check, rates, appendix, plot.  Exit codes:
0 ok, 1 numerical failure (the message names the failing sweep point),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import List, Optional

from . import analysis
from .config import ExperimentConfig, load_config
from .errors import ConfigError, RosenauError
from .runner import RunError, compute_rows, run, simulate


def _add_common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="experiment config file")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rosenau",
        description="Kinetic approximations to the heat equation: sweeps, metrics, decay checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("simulate", help="solve and dump distributions"))
    _add_common(sub.add_parser("metrics", help="compute metric series to CSV"))
    _add_common(sub.add_parser("check", help="run the decay bound checks"))

    p_rates = sub.add_parser("rates", help="fit decay exponents from a metric series")
    _add_common(p_rates)
    p_rates.add_argument("--quantity", default=None,
                         help="metric to fit (default: every metric in the config)")
    p_rates.add_argument("--window", nargs=2, type=float, default=(5.0, 100.0),
                         metavar=("T_LO", "T_HI"))

    p_app = sub.add_parser("appendix", help="growth table of the regularized-kernel norm")
    p_app.add_argument("--s", type=float, default=0.9)
    p_app.add_argument("--tmax", type=float, default=1000.0)
    p_app.add_argument("--points", type=int, default=13)
    p_app.add_argument("--panels", type=int, default=128)

    p_plot = sub.add_parser("plot", help="render SVG decay plots from a results CSV")
    p_plot.add_argument("--csv", required=True, help="results.csv produced by `metrics`")
    p_plot.add_argument("--out", default=".", help="directory for the SVG files")
    return parser


def _load(args) -> ExperimentConfig:
    if not os.path.exists(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    return load_config(args.config)


def _cmd_rates(args) -> int:
    cfg = _load(args)
    quantities = [args.quantity] if args.quantity else sorted(cfg.metrics)
    if not quantities:
        raise ConfigError("no metrics configured and no --quantity given")
    cfg.metrics = quantities
    rows = compute_rows(cfg, threads=args.threads)
    window = tuple(args.window)
    for quantity in quantities:
        for eps in sorted(cfg.epsilons):
            series = [(r.t, r.value) for r in rows
                      if r.quantity == quantity and r.epsilon == eps]
            fit = analysis.rate_fit(series, window=window)
            print(f"{quantity} eps={eps:g}: exponent {fit.exponent:+.4f} "
                  f"prefactor {fit.prefactor:.6g} r2 {fit.r_squared:.6f} "
                  f"window [{fit.window[0]:g}, {fit.window[1]:g}] n={fit.n_points}")
    return 0


def _cmd_appendix(args) -> int:
    points = max(args.points, 2)
    times = [0.0] + [args.tmax ** (k / (points - 1)) for k in range(points)]
    print(f"{'t':>12} {'I_s':>14} {'B_s':>12} {'B_s/(1+t)^0.1':>14} {'balanced':>12}")
    for t in times:
        rep = analysis.appendix_report(args.s, t, panels=args.panels)
        print(f"{t:12.4g} {rep.integral:14.6e} {rep.value:12.6g} "
              f"{rep.normalized:14.6g} {rep.value_balanced:12.6g}")
    return 0


def _cmd_plot(args) -> int:
    from .runner import Row
    from .spectral import GridSpec
    from .svg import plot_rows

    rows: List[Row] = []
    with open(args.csv) as fh:
        for rec in csv.DictReader(fh):
            rows.append(Row(
                kernel=rec["kernel"], epsilon=float(rec["epsilon"]), t=float(rec["t"]),
                quantity=rec["quantity"], value=float(rec["value"]),
                argsup=float(rec["argsup"]),
                grid=GridSpec(float(rec["grid_L"]), int(rec["grid_N"]))))
    os.makedirs(args.out, exist_ok=True)
    for quantity in sorted(set(r.quantity for r in rows)):
        path = os.path.join(args.out, f"{quantity}.svg")
        with open(path, "w") as fh:
            fh.write(plot_rows([r for r in rows if r.quantity == quantity], quantity))
        print(f"wrote {path}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = _load(args)
            simulate(cfg, out_dir=args.out, verbose=args.verbose)
            return 0
        if args.command == "metrics":
            cfg = _load(args)
            cfg.checks = []
            run(cfg, out_dir=args.out, threads=args.threads, verbose=args.verbose)
            return 0
        if args.command == "check":
            cfg = _load(args)
            cfg.metrics = []
            run(cfg, out_dir=args.out, threads=args.threads, verbose=args.verbose)
            return 0
        if args.command == "rates":
            return _cmd_rates(args)
        if args.command == "appendix":
            return _cmd_appendix(args)
        if args.command == "plot":
            return _cmd_plot(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RunError, RosenauError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
