"""Command-line entry point.

Exit status: 0 on success, 1 on invalid input or I/O failure, 2 when
``check-bounds`` finds a violated almost-sure bound.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import bounds, harness
from .diagnostics import diagnose
from .engine import laplace_approximate
from .errors import LaplabError
from .models import (
    MODELS,
    BernoulliDataset,
    MultinomialDataset,
    PoissonDataset,
    TrueDistribution,
    bernoulli_exact_log_z,
    bernoulli_log_laplace_closed,
    bernoulli_objective,
    multinomial_exact_log_z,
    multinomial_log_laplace_closed,
    multinomial_objective,
    poisson_exact_log_marginal,
    poisson_log_laplace_closed,
    poisson_log_ratio_closed,
    poisson_objective,
    quadrature_oracle,
)
from .numerics import log_expm1_ratio
from .plot import emit_plot

SEED_ENV = "LAPLAB_SEED"
HELP_WIDTH = 88

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(self, message)


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=32)


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_dataset_flags(p, *, truth=False):
    p.add_argument("--model", required=True, choices=MODELS, help="reference model")
    p.add_argument("--n", type=int, help="bernoulli: number of trials")
    p.add_argument("--heads", type=int, help="bernoulli: number of successes")
    p.add_argument("--counts", type=_int_list,
                   help="multinomial: category totals; poisson: observed counts (comma-separated)")
    p.add_argument("--theta", type=float, default=1.0,
                   help="poisson: fixed rate multiplier theta > 0 (default: 1.0)")
    if truth:
        _add_truth_flags(p)


def _add_truth_flags(p):
    p.add_argument("--theta-star", type=float, help="bernoulli: true success probability")
    p.add_argument("--psi-star", type=_float_list, help="multinomial: true cell probabilities")
    p.add_argument("--lambda-star", type=float, help="poisson: true mean count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="laplab",
        description="Laplace approximations to normalizing constants and their relative error.",
        formatter_class=_formatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("approx", help="Laplace approximation via the Newton engine",
                       formatter_class=_formatter)
    _add_dataset_flags(p)

    p = sub.add_parser("exact", help="exact log normalizing constant or marginal likelihood",
                       formatter_class=_formatter)
    _add_dataset_flags(p)
    p.add_argument("--quadrature", action="store_true",
                   help="also evaluate the adaptive quadrature oracle")

    p = sub.add_parser("ratio", help="exact / Laplace ratio and signed relative error",
                       formatter_class=_formatter)
    _add_dataset_flags(p)

    p = sub.add_parser("simulate", help="Monte Carlo comparison over a grid of n",
                       formatter_class=_formatter)
    p.add_argument("--config", help="JSON file with experiment fields; flags override it")
    p.add_argument("--model", choices=MODELS, help="reference model")
    _add_truth_flags(p)
    p.add_argument("--n-grid", type=_int_list, help="strictly increasing sample sizes")
    p.add_argument("--reps", type=int, help="replicates per sample size")
    p.add_argument("--base-seed", "--seed", dest="base_seed", type=int,
                   help=f"64-bit base seed (fallback: ${SEED_ENV}, then 0)")
    p.add_argument("--theta-grid", type=_float_list,
                   help="poisson: theta values for the invariance check (default: 1.0)")
    p.add_argument("--n-min-t2", type=int, help="smallest n at which the coin-flip bound is checked")
    p.add_argument("--n-min-t3", type=int, help="smallest n at which the multinomial bound is checked")
    p.add_argument("--out", help="CSV path for per-replicate records")
    p.add_argument("--out-json", help="JSON path for records, bound summary and rate fit")
    p.add_argument("--out-plot", help="SVG path for the log-log error plot")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: number of CPUs)")

    p = sub.add_parser("check-bounds", help="check the almost-sure lower bounds",
                       formatter_class=_formatter)
    p.add_argument("records", nargs="?", help="CSV of records from simulate")
    p.add_argument("--model", choices=MODELS, help="reference model (single-dataset mode)")
    p.add_argument("--n", type=int, help="bernoulli: number of trials")
    p.add_argument("--heads", type=int, help="bernoulli: number of successes")
    p.add_argument("--counts", type=_int_list, help="multinomial or poisson counts")
    p.add_argument("--lambda-star", type=float, help="poisson: true mean count")
    p.add_argument("--n-min-t2", type=int, default=bounds.DEFAULT_N_MIN_T2,
                   help=f"smallest n for the coin-flip bound (default: {bounds.DEFAULT_N_MIN_T2})")
    p.add_argument("--n-min-t3", type=int, default=bounds.DEFAULT_N_MIN_T3,
                   help=f"smallest n for the multinomial bound (default: {bounds.DEFAULT_N_MIN_T3})")

    p = sub.add_parser("rate-fit", help="fit the log-log slope of the relative error",
                       formatter_class=_formatter)
    p.add_argument("records", help="CSV of records from simulate")
    p.add_argument("--statistic", choices=harness.STATISTICS, default="median",
                   help="per-n summary of |p/p_LA - 1| (default: median)")
    p.add_argument("--min-records", type=int, default=30,
                   help="usable records required per n (default: 30)")
    p.add_argument("--out", help="JSON path for the fit")

    p = sub.add_parser("diagnose", help="finite-n regularity diagnostics for one dataset",
                       formatter_class=_formatter)
    _add_dataset_flags(p, truth=True)
    p.add_argument("--grid-points", type=int, default=11, help="grid points per dimension (default: 11)")
    p.add_argument("--delta", type=float, help="ball radius (default: model-specific)")
    p.add_argument("--annulus-radius", type=float, help="outer radius for A3 (default: 5 * delta)")
    p.add_argument("--out", help="JSON path for the report")

    p = sub.add_parser("plot", help="SVG log-log plot of the median relative error",
                       formatter_class=_formatter)
    p.add_argument("records", help="CSV of records from simulate")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--lambda-star", type=float, help="poisson: true mean count, for the floor line")
    return parser


def _dataset(args):
    if args.model == "bernoulli":
        if args.n is None or args.heads is None:
            raise LaplabError("bernoulli needs --n and --heads")
        return BernoulliDataset(args.n, args.heads)
    if args.counts is None:
        raise LaplabError(f"{args.model} needs --counts")
    if args.model == "multinomial":
        return MultinomialDataset(tuple(args.counts))
    return PoissonDataset(np.asarray(args.counts))


def _exact(model, d, theta):
    if model == "bernoulli":
        return bernoulli_exact_log_z(d)
    if model == "multinomial":
        return multinomial_exact_log_z(d)
    return poisson_exact_log_marginal(d, theta)


def _closed(model, d, theta):
    if model == "bernoulli":
        return bernoulli_log_laplace_closed(d)
    if model == "multinomial":
        return multinomial_log_laplace_closed(d)
    return poisson_log_laplace_closed(d, theta)


def _objective(model, d, theta):
    if model == "bernoulli":
        return bernoulli_objective(d)
    if model == "multinomial":
        return multinomial_objective(d)
    return poisson_objective(d, theta)


def _fmt_vec(v) -> str:
    v = np.atleast_1d(v)
    if v.size == 1:
        return f"{float(v[0]):.10g}"
    return "(" + ", ".join(f"{float(x):.10g}" for x in v) + ")"


def cmd_approx(args) -> int:
    d = _dataset(args)
    res = laplace_approximate(_objective(args.model, d, args.theta))
    print(f"mode = {_fmt_vec(res.mode)}")
    print(f"log_det_hessian = {res.log_det_hessian:.12g}")
    print(f"log_laplace = {res.log_laplace:.12g}  (p_LA = {math.exp(res.log_laplace):.10g})")
    print(f"iterations = {res.iterations}, final |grad| = {res.final_grad_norm:.3g}")
    return EXIT_OK


def cmd_exact(args) -> int:
    d = _dataset(args)
    value = _exact(args.model, d, args.theta)
    print(f"log_exact = {value:.12g}  (p = {math.exp(value):.10g})")
    if args.quadrature:
        q = quadrature_oracle(args.model, d, args.theta if args.model == "poisson" else None)
        print(f"log_quadrature = {q:.12g}  (difference {q - value:.3g})")
    return EXIT_OK


def cmd_ratio(args) -> int:
    d = _dataset(args)
    if args.model == "poisson":
        log_ratio = poisson_log_ratio_closed(d)
    else:
        log_ratio = _exact(args.model, d, args.theta) - _closed(args.model, d, args.theta)
    print(f"ratio p/p_LA = {math.exp(log_ratio):.10g}")
    print(f"relative error p/p_LA - 1 = {log_expm1_ratio(log_ratio, 0.0):.10g}")
    if args.model == "poisson":
        print("note: theta-independent (the ratio depends on the data only through the total count)")
    return EXIT_OK


_SIM_FIELDS = ("model", "theta_star", "psi_star", "lambda_star", "n_grid", "reps", "base_seed",
               "theta_grid", "n_min_t2", "n_min_t3", "out", "out_json", "out_plot")


def _load_config(args) -> harness.ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise LaplabError(f"{args.config} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise LaplabError(f"{args.config} must hold a JSON object")
    for name in _SIM_FIELDS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    if "base_seed" not in data:
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                data["base_seed"] = int(env)
            except ValueError:
                raise LaplabError(f"${SEED_ENV} must be an integer, got {env!r}") from None
    for required in ("model", "n_grid", "reps"):
        if required not in data:
            raise LaplabError(f"simulate needs --{required.replace('_', '-')} (flag or config)")
    return harness.ExperimentConfig.from_dict(data)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    threads = args.threads if args.threads is not None else harness.default_threads()
    records = harness.run_experiment(cfg, threads=max(1, threads))
    summary = harness.summarize_bounds(records)
    try:
        fit = harness.fit_rate(records)
    except LaplabError:
        fit = None

    print(f"model {cfg.model} ({cfg.truth().describe()}), reps {cfg.reps}, base seed {cfg.base_seed}")
    for n in cfg.n_grid:
        vals = [r.rel_error_abs for r in records if r.n == n and r.usable]
        med = float(np.median(vals)) if vals else math.nan
        print(f"  n = {n:>8}: median |p/p_LA - 1| = {med:.6g} over {len(vals)} usable records")
    _print_summary(summary)
    if fit is not None:
        print(f"rate fit: slope {fit.slope:.4f}, r^2 {fit.r_squared:.5f}")
    if cfg.out:
        harness.emit(records, "csv", cfg.out)
    if cfg.out_json:
        harness.emit({"config": cfg.to_dict(), "records": records, "bounds": summary,
                      "rate_fit": fit}, "json", cfg.out_json)
    if cfg.out_plot:
        emit_plot(records, cfg.out_plot, cfg.lambda_star)
    return EXIT_OK


def _print_summary(summary) -> None:
    for theorem, entry in summary.items():
        if entry["applicable"] or entry["violated"]:
            print(f"  {theorem}: applicable {entry['applicable']}, satisfied {entry['satisfied']}, "
                  f"violated {entry['violated']}")


def cmd_check_bounds(args) -> int:
    if args.records:
        summary = harness.summarize_bounds(harness.read_records(args.records))
        _print_summary(summary)
        violations = harness.total_violations(summary)
        for entry in summary.values():
            for rec in entry["violations"]:
                print(f"  violation: {json.dumps(rec)}")
        if not any(e["applicable"] for e in summary.values()):
            print("  no applicable checks")
        return EXIT_VIOLATION if violations else EXIT_OK
    if args.model is None:
        raise LaplabError("check-bounds needs a records CSV or --model with dataset flags")
    args.theta = 1.0
    d = _dataset(args)
    checks = bounds.check_dataset(args.model, d, lambda_star=args.lambda_star,
                                  n_min_t2=args.n_min_t2, n_min_t3=args.n_min_t3)
    violated = False
    for c in checks:
        if not c.applicable:
            state = "not applicable"
        else:
            state = "satisfied" if c.satisfied else "VIOLATED"
            violated = violated or not c.satisfied
        print(f"{c.theorem}: {state} (signed error {c.observed_rel_error_signed:.6g}, "
              f"bound {c.bound_value:.6g})")
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_rate_fit(args) -> int:
    records = harness.read_records(args.records)
    models = sorted({r.model for r in records})
    if not models:
        raise LaplabError(f"{args.records} holds no records")
    fits = {}
    for model in models:
        fit = harness.fit_rate([r for r in records if r.model == model], args.statistic,
                               args.min_records)
        fits[model] = fit
        print(f"{model}: slope {fit.slope:.4f}, intercept {fit.intercept:.4f}, "
              f"r^2 {fit.r_squared:.5f} ({fit.statistic} over n = "
              f"{','.join(str(n) for n in fit.n_grid)})")
    if args.out:
        harness.emit(fits, "json", args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    d = _dataset(args)
    truth = TrueDistribution(
        args.model, args.theta_star,
        tuple(args.psi_star) if args.psi_star is not None else None, args.lambda_star,
    )
    report = diagnose(args.model, d, truth, args.grid_points, args.annulus_radius,
                      theta=args.theta, delta=args.delta)
    print(f"{args.model}, n = {report.n}, ball centre {_fmt_vec(report.ball_center)}, "
          f"delta {report.delta:.6g}")
    for order, value in report.a1_sup_scaled_derivs.items():
        print(f"  A1 order {order}: sup |d^a log p*| / n = {value:.6g}")
    print(f"  A2 eigenvalues of H/n in [{report.a2_eig_bounds[0]:.6g}, {report.a2_eig_bounds[1]:.6g}]")
    print(f"  A3 sup gap outside ball / n = {report.a3_outside_gap:.6g}")
    print(f"  A4 sqrt(n)|mode - truth| = {report.a4_scaled_mode_dev['q50']:.6g}")
    print(f"  A5 prior density in [{report.a5_prior_bounds[0]:.6g}, {report.a5_prior_bounds[1]:.6g}]")
    if args.out:
        harness.emit(report, "json", args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    records = harness.read_records(args.records)
    emit_plot(records, args.out, args.lambda_star)
    return EXIT_OK


COMMANDS = {
    "approx": cmd_approx,
    "exact": cmd_exact,
    "ratio": cmd_ratio,
    "simulate": cmd_simulate,
    "check-bounds": cmd_check_bounds,
    "rate-fit": cmd_rate_fit,
    "diagnose": cmd_diagnose,
    "plot": cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"{exc.parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (LaplabError, ValueError, OSError) as exc:
        print(f"laplab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
