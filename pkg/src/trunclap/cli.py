"""Command-line driver: one subcommand per experiment.

    trunclap <matrix-check|solve|oracle-check|critical-exponent|anti-hopf|
              rescaling|ordering|superlinear-pplus|sandwich>
             --config FILE [--seed N] [--out DIR] [--jobs N]

Configuration is line-based key=value (# comments); flags override config.
Exit code 0 iff every check passes, 1 on failed checks, 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .config import (
    ConfigError,
    coefficient_from_spec,
    domain_from_config,
    get_float,
    get_float_list,
    get_int,
    get_str,
    parse_config,
)

SUBCOMMANDS = ("matrix-check", "solve", "oracle-check", "critical-exponent",
               "anti-hopf", "rescaling", "ordering", "superlinear-pplus",
               "sandwich")

SIGN_NAMES = {"pminus": "minus", "pplus": "plus", "mean": "mean"}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trunclap",
        description="Experiments for extremal Hessian eigenvalue-sum problems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="key=value config file")
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--out", default=None, help="artifact directory")
        cmd.add_argument("--jobs", type=int, default=1,
                         help="concurrent independent sub-runs")
    return parser


def _domain(cfg, required=False):
    """Domain from config keys, or None so commands use their defaults."""
    if "R" in cfg or "center" in cfg:
        return domain_from_config(cfg)
    if required:
        raise ConfigError("missing required config key 'R'")
    return None


def _order(cfg):
    value = get_int(cfg, "stencil", default=0)
    return value if value > 0 else None


def dispatch(args):
    cfg = parse_config(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else get_int(cfg, "seed", default=1)
    out = args.out
    jobs = args.jobs
    name = args.command

    if name == "matrix-check":
        return experiments.cmd_matrix_check(
            seed=seed, n_trials=get_int(cfg, "n_trials", default=1000),
            out_dir=out, jobs=jobs)
    if name == "oracle-check":
        return experiments.cmd_oracle_check(
            n_points=get_int(cfg, "n_points", default=1000), seed=seed,
            out_dir=out, jobs=jobs)
    if name == "solve":
        sign = SIGN_NAMES[get_str(cfg, "operator", default="pminus",
                                  choices=set(SIGN_NAMES))]
        coeff, _ = coefficient_from_spec(cfg.get("a"))
        init = get_str(cfg, "init", default="auto",
                       choices={"auto"} | set(experiments.INIT_MODES))
        dt_raw = get_str(cfg, "dt", default="auto")
        return experiments.cmd_solve(
            _domain(cfg, required=True), sign,
            get_int(cfg, "k", default=1), get_float(cfg, "p"),
            get_float(cfg, "h"), order=_order(cfg), a=coeff,
            shift=get_float(cfg, "shift", default=0.0),
            tol=get_float(cfg, "tol", default=1e-7),
            max_iter=get_int(cfg, "max_iter", default=400_000),
            init=None if init == "auto" else init,
            dt=None if dt_raw == "auto" else get_float(cfg, "dt"),
            out_dir=out, jobs=jobs)
    if name == "critical-exponent":
        return experiments.cmd_critical_exponent(
            domain=_domain(cfg), k=get_int(cfg, "k", default=1),
            p_list=get_float_list(cfg, "p_list", default=(0.5, 0.9, 1.0, 1.2)),
            h=get_float(cfg, "h", default=1.0 / 32.0), order=_order(cfg),
            out_dir=out, jobs=jobs)
    if name == "anti-hopf":
        fit_min = get_float(cfg, "fit_min", default=0.0)
        fit_max = get_float(cfg, "fit_max", default=0.0)
        return experiments.cmd_anti_hopf(
            domain=_domain(cfg), p=get_float(cfg, "p", default=0.5),
            k=get_int(cfg, "k", default=1),
            h=get_float(cfg, "h", default=1.0 / 64.0), order=_order(cfg),
            fit_min=fit_min or None, fit_max=fit_max or None,
            out_dir=out, jobs=jobs)
    if name == "rescaling":
        return experiments.cmd_rescaling(
            k=get_int(cfg, "k", default=1),
            p_list=get_float_list(cfg, "p_list", default=(0.5, 0.75, 0.9)),
            perturbation=get_float(cfg, "perturbation", default=0.02),
            h_div=get_int(cfg, "h_div", default=48), order=_order(cfg),
            out_dir=out, jobs=jobs)
    if name == "ordering":
        return experiments.cmd_ordering(
            domain=_domain(cfg), p=get_float(cfg, "p", default=0.5),
            k=get_int(cfg, "k", default=1),
            h=get_float(cfg, "h", default=1.0 / 32.0), order=_order(cfg),
            out_dir=out, jobs=jobs)
    if name == "superlinear-pplus":
        return experiments.cmd_superlinear_pplus(
            domain=_domain(cfg), p=get_float(cfg, "p", default=2.0),
            h=get_float(cfg, "h", default=1.0 / 32.0), order=_order(cfg),
            out_dir=out, jobs=jobs)
    if name == "sandwich":
        coeff, bounds = coefficient_from_spec(cfg.get("a", "sin:0.5:1"))
        return experiments.cmd_sandwich(
            domain=_domain(cfg), p=get_float(cfg, "p", default=0.5),
            k=get_int(cfg, "k", default=1),
            h=get_float(cfg, "h", default=1.0 / 32.0), order=_order(cfg),
            a=coeff, a_bounds=bounds, out_dir=out, jobs=jobs)
    raise ConfigError(f"unknown command {name!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = dispatch(args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in report.lines():
        print(line)
    return 0 if report.overall_pass else 1


if __name__ == "__main__":
    sys.exit(main())
