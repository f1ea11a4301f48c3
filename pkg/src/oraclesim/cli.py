"""Command-line entry points: run, sweep, coverage-plan, replay.

Exit codes: 0 on success, 1 on configuration/validation errors, 2 on runtime
failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ALPHA_BANDS, STRATEGIES, RunConfig, parse_config
from .coverage import empirical_coverage, plan_coverage
from .errors import ConfigError, SimulationError
from .experiment import SweepGrid, replay_trace, run_experiment, run_sweep
from .metrics import export_metrics
from .reputation import ReputationParams

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2

_PAIR_FIELDS = {"alpha_band", "source_tolerance_range", "falsification_range"}
_SKIP_FLAGS = {"reputation", "output_dir"}


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.replace(",", "-").split("-")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'low,high' or 'low-high', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for f in dataclasses.fields(RunConfig):
        if f.name in _SKIP_FLAGS:
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.name in _PAIR_FIELDS:
            parser.add_argument(flag, type=_parse_pair, default=None, help=f"override {f.name}")
        elif f.type in ("int", "int | None"):
            parser.add_argument(flag, type=int, default=None, help=f"override {f.name}")
        elif f.type == "float":
            parser.add_argument(flag, type=float, default=None, help=f"override {f.name}")
        else:
            parser.add_argument(flag, type=str, default=None, help=f"override {f.name}")
    for f in dataclasses.fields(ReputationParams):
        flag = "--rep-" + f.name.replace("_", "-")
        kind = float if f.type == "float" else (int if f.type == "int" else str)
        parser.add_argument(flag, type=kind, default=None, help=f"override reputation.{f.name}")


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    rep: dict = {}
    for f in dataclasses.fields(RunConfig):
        if f.name in _SKIP_FLAGS:
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = list(value) if f.name in _PAIR_FIELDS else value
    for f in dataclasses.fields(ReputationParams):
        value = getattr(args, f"rep_{f.name}", None)
        if value is not None:
            rep[f.name] = value
    if rep:
        overrides["reputation"] = rep
    return overrides


def _band_list(text: str) -> list[tuple[float, float]]:
    bands = []
    for part in text.split(";"):
        part = part.strip()
        if part in ALPHA_BANDS:
            bands.append(ALPHA_BANDS[part])
        else:
            bands.append(_parse_pair(part))
    return bands


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oraclesim",
        description="Deterministic covert-testing oracle network simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one simulation and write artifacts")
    run_p.add_argument("--config", type=Path, default=None, help="JSON config file")
    run_p.add_argument("--out", type=Path, default=None, help="output directory")
    _add_config_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="run a parameter grid of simulations")
    sweep_p.add_argument("--config", type=Path, default=None, help="base JSON config file")
    sweep_p.add_argument("--out", type=Path, required=True, help="output directory")
    sweep_p.add_argument(
        "--feeders", type=str, default="50", help="comma-separated feeder counts"
    )
    sweep_p.add_argument(
        "--malicious", type=str, default="0.2", help="comma-separated malicious fractions"
    )
    sweep_p.add_argument(
        "--alpha-bands",
        type=str,
        default="0.1-0.3",
        help="semicolon-separated bands, each 'low-high'",
    )
    sweep_p.add_argument(
        "--strategies",
        type=str,
        default="dectest",
        help=f"comma-separated subset of {','.join(STRATEGIES)}",
    )
    sweep_p.add_argument("--replicates", type=int, default=1, help="repetitions per cell")
    sweep_p.add_argument("--workers", type=int, default=1, help="parallel cell workers")
    _add_config_flags(sweep_p)

    cov_p = sub.add_parser("coverage-plan", help="test-coverage round/cycle planning")
    cov_p.add_argument("--population", type=int, required=True)
    cov_p.add_argument("--sample-size", type=int, required=True)
    cov_p.add_argument("--confidence", type=float, required=True)
    cov_p.add_argument("--tx-per-second", type=float, default=1000.0)
    cov_p.add_argument("--tests-per-cycle", type=float, default=100.0)
    cov_p.add_argument("--cycle-capacity", type=float, default=1.0)
    cov_p.add_argument(
        "--validate-trials",
        type=int,
        default=0,
        help="when positive, Monte Carlo check of the round count",
    )
    cov_p.add_argument("--seed", type=int, default=0)

    replay_p = sub.add_parser("replay", help="recompute metrics from a trace log")
    replay_p.add_argument("--trace", type=Path, required=True)
    replay_p.add_argument("--out", type=Path, required=True, help="output CSV path")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config(args.config, _collect_overrides(args))
    artifacts = run_experiment(cfg, args.out)
    print(f"run {cfg.run_id()} complete: {artifacts.metrics_csv}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = parse_config(args.config, _collect_overrides(args))
    grid = SweepGrid(
        feeders=tuple(int(v) for v in args.feeders.split(",")),
        malicious_fractions=tuple(float(v) for v in args.malicious.split(",")),
        alpha_bands=tuple(_band_list(args.alpha_bands)),
        strategies=tuple(args.strategies.split(",")),
        replicates=tuple(range(args.replicates)),
    )
    result = run_sweep(base, grid, args.out, workers=args.workers)
    print(f"sweep complete: {len(result.rows)} rows -> {result.combined_csv}")
    if result.failures:
        print(f"{len(result.failures)} cell(s) failed; see failures.json", file=sys.stderr)
    return EXIT_OK if not result.failures else EXIT_RUNTIME


def _cmd_coverage(args: argparse.Namespace) -> int:
    plan = plan_coverage(
        args.population,
        args.sample_size,
        args.confidence,
        args.tx_per_second,
        args.tests_per_cycle,
        args.cycle_capacity,
    )
    print(f"rounds={plan.rounds} cycles={plan.cycles}")
    if args.validate_trials > 0:
        measured = empirical_coverage(
            args.population, args.sample_size, plan.rounds, args.validate_trials, args.seed
        )
        print(f"empirical_coverage={measured:.6f} target={args.confidence}")
    return EXIT_OK


def _cmd_replay(args: argparse.Namespace) -> int:
    rows = replay_trace(args.trace)
    export_metrics(rows, "csv", args.out)
    print(f"replayed {len(rows)} rounds -> {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "coverage-plan": _cmd_coverage,
        "replay": _cmd_replay,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
