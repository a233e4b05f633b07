"""Command line front end: simulate paths, estimate from CSV, run tables.

Exit codes: 0 success, 1 runtime failure (bad model/simulation config at
run time, degenerate input path, failed search), 2 usage errors (bad flags
or malformed input files).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .estimators import (
    EstimateResult,
    METHOD_INTEGRATED_SIGMA_SQ,
    NoSolutionError,
    gamma_known_sigma,
    gamma_ratio_estimate,
    integrated_sigma_sq,
    joint_estimate,
    sigma_known_gamma,
)
from .experiment import TABLE_IDS, reproduce_table
from .model import AffineDrift, ModelSpec, ckls_model, parse_model_config, sample_delay_drift
from .simulate import (
    CsvFormatError,
    DegeneratePathError,
    SimConfig,
    euler_maruyama,
    read_path_csv,
    write_path_csv,
)

_MODEL_CHOICES = ("cir", "ckls", "random-delay")
_METHOD_CHOICES = ("sigma-known-gamma", "gamma-ratio", "joint", "gamma-known-sigma", "integrated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathvol",
        description="Simulate power-diffusion paths and estimate (sigma, gamma) from them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate one path and write it as CSV")
    sim.add_argument("--config", type=Path, help="key=value model config file (flags override)")
    sim.add_argument("--model", choices=_MODEL_CHOICES)
    sim.add_argument("--a", type=float, help="mean-reversion speed (cir/ckls)")
    sim.add_argument("--b", type=float, help="mean-reversion level (cir/ckls)")
    sim.add_argument("--sigma", type=float, help="diffusion scale, > 0")
    sim.add_argument("--gamma", type=float, help="diffusion power in [0, 1]")
    sim.add_argument("--n", type=int, required=True, help="number of grid steps on [0, 1]")
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--y0", type=float, help="starting value, > 0")
    group.add_argument("--y0-random", action="store_true", help="draw y0 uniformly from [0.1, 10]")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--stop-ratio", type=float, default=0.001)
    sim.add_argument("--delay-rule", choices=("scaled", "literal"), default="scaled")
    sim.add_argument("--out", type=Path, required=True, help="output CSV file (header t,y)")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="run one estimator on a path CSV")
    est.add_argument("--in", dest="infile", type=Path, required=True, help="input CSV (header t,y)")
    est.add_argument("--method", choices=_METHOD_CHOICES, required=True)
    est.add_argument("--gamma", type=float, help="known gamma (sigma-known-gamma, integrated)")
    est.add_argument("--h", type=float, help="increment exponent; defaults to --gamma")
    est.add_argument("--h1", type=float, default=0.0, help="first exponent (gamma-ratio)")
    est.add_argument("--h2", type=float, default=1.0, help="second exponent (gamma-ratio)")
    est.add_argument("--grid-n", type=int, help="search grid size (default 300 ratio, 30 others)")
    est.add_argument("--sigma", type=float, help="known sigma (gamma-known-sigma)")
    est.add_argument("--curve", type=Path, help="write the objective curve CSV here")
    est.set_defaults(func=cmd_estimate)

    exp = sub.add_parser("experiment", help="rerun a benchmark error table")
    exp.add_argument("--table", choices=TABLE_IDS, required=True)
    exp.add_argument("--trials", type=int, default=1000)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", type=Path, help="write the comparison CSV here")
    exp.set_defaults(func=cmd_experiment)
    return parser


def _build_model(args, parser: argparse.ArgumentParser, rng: np.random.Generator) -> ModelSpec:
    base: ModelSpec | None = None
    if args.config is not None:
        try:
            base = parse_model_config(args.config.read_text())
        except OSError as exc:
            parser.error(f"--config: cannot read file: {exc}")
        except ValueError as exc:
            parser.error(f"--config: {exc}")
    kind = args.model
    if kind is None and base is None:
        parser.error("--model is required when no --config file is given")

    sigma = args.sigma if args.sigma is not None else (base.sigma if base else None)
    gamma = args.gamma if args.gamma is not None else (base.gamma if base else None)
    if sigma is None:
        parser.error("--sigma is required")

    if kind is None:
        # the config file decides the drift; scalar flags already applied
        return ModelSpec(drift=base.drift, sigma=sigma, gamma=gamma)
    if kind == "random-delay":
        if gamma is None:
            parser.error("--gamma is required for --model random-delay")
        return ModelSpec(drift=sample_delay_drift(rng), sigma=sigma, gamma=gamma)
    base_affine = base.drift if (base is not None and isinstance(base.drift, AffineDrift)) else None
    a = args.a if args.a is not None else (base_affine.a if base_affine else None)
    b = args.b if args.b is not None else (base_affine.b if base_affine else None)
    if a is None or b is None:
        parser.error("--a and --b are required for cir/ckls models")
    if kind == "cir" and gamma is None:
        gamma = 0.5
    if gamma is None:
        parser.error("--gamma is required for --model ckls")
    return ckls_model(a, b, sigma, gamma)


def cmd_simulate(args, parser: argparse.ArgumentParser) -> int:
    if args.n < 2:
        parser.error("--n must be >= 2")
    if args.sigma is not None and args.sigma < 0:
        parser.error("--sigma must be >= 0")
    if args.gamma is not None and not 0.0 <= args.gamma <= 1.0:
        parser.error("--gamma must lie in [0, 1]")
    if args.y0 is not None and args.y0 <= 0:
        parser.error("--y0 must be > 0")
    if not 0.0 < args.stop_ratio < 1.0:
        parser.error("--stop-ratio must lie in (0, 1)")
    rng = np.random.default_rng(args.seed)
    try:
        model = _build_model(args, parser, rng)
        y0 = args.y0  # None with --y0-random (or neither) samples uniformly
        cfg = SimConfig(
            n_steps=args.n,
            y0=y0,
            stop_ratio=args.stop_ratio,
            seed=args.seed,
            delay_rule=args.delay_rule,
        )
        path = euler_maruyama(model, cfg, rng)
        write_path_csv(path, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"stopped_early={path.stopped_early} m={path.m} positivity_fixes={path.positivity_fixes}",
        file=sys.stderr,
    )
    return 0


def _write_curve(result: EstimateResult, dest: Path) -> None:
    lines = ["h,objective"]
    for h, obj in result.objective_curve or ():
        lines.append(f"{h:.17g},{obj:.17g}")
    dest.write_text("\n".join(lines) + "\n")


def cmd_estimate(args, parser: argparse.ArgumentParser) -> int:
    method = args.method
    if method in ("sigma-known-gamma", "integrated") and args.gamma is None:
        parser.error(f"--gamma is required for --method {method}")
    if method == "gamma-known-sigma" and args.sigma is None:
        parser.error("--sigma is required for --method gamma-known-sigma")
    if method == "gamma-ratio" and args.h1 == args.h2:
        parser.error("--h1 and --h2 must differ")
    for name in ("gamma", "h", "h1", "h2"):
        value = getattr(args, name)
        if value is not None and not 0.0 <= value <= 1.0:
            parser.error(f"--{name} must lie in [0, 1]")
    if args.grid_n is not None and args.grid_n < 2:
        parser.error("--grid-n must be >= 2")

    try:
        path = read_path_csv(args.infile)
    except OSError as exc:
        print(f"error: cannot read {args.infile}: {exc}", file=sys.stderr)
        return 2
    except CsvFormatError as exc:
        print(f"error: {args.infile}: {exc}", file=sys.stderr)
        return 2

    try:
        if method == "sigma-known-gamma":
            h = args.h if args.h is not None else args.gamma
            result = sigma_known_gamma(path, gamma=args.gamma, h=h)
        elif method == "gamma-ratio":
            result = gamma_ratio_estimate(path, h1=args.h1, h2=args.h2, grid_n=args.grid_n or 300)
        elif method == "joint":
            result = joint_estimate(path, grid_n=args.grid_n or 30)
        elif method == "gamma-known-sigma":
            if args.sigma <= 0:
                parser.error("--sigma must be > 0 for gamma-known-sigma")
            result = gamma_known_sigma(path, sigma=args.sigma, grid_n=args.grid_n or 30)
        else:  # integrated
            total = integrated_sigma_sq(path, gamma=args.gamma)
            window = path.delta * (len(path.values) - 1)
            result = EstimateResult(
                method=METHOD_INTEGRATED_SIGMA_SQ,
                sigma_hat=float(np.sqrt(total / window)),
            )
    except DegeneratePathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NoSolutionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if result.degenerate:
        print("warning: zero-variance path; sigma estimate is 0", file=sys.stderr)
    print(EstimateResult.CSV_HEADER)
    print(result.to_csv_row())
    if args.curve is not None and result.objective_curve is not None:
        _write_curve(result, args.curve)
    return 0


def cmd_experiment(args, parser: argparse.ArgumentParser) -> int:
    if args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        report = reproduce_table(args.table, trials=args.trials, master_seed=args.seed)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.format_text())
    if args.out is not None:
        args.out.write_text(report.to_csv())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
