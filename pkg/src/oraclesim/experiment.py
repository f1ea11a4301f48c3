"""Experiment orchestration: single runs, grid sweeps, trace files, and replay."""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .chainsim import run_simulation
from .config import RunConfig, band_label, echo_config
from .errors import DomainError
from .metrics import (
    MetricsRow,
    deviation_entropy,
    detection_success_rate,
    export_metrics,
    feed_accuracy,
    rows_from_round_metrics,
)
from .selection import derive_label_seed


def write_trace(trace: list[dict], path: str | Path) -> Path:
    """Write the event trace as newline-delimited JSON records."""
    path = Path(path)
    with path.open("w") as fh:
        for event in trace:
            fh.write(json.dumps(event, sort_keys=True))
            fh.write("\n")
    return path


def read_trace(path: str | Path) -> list[dict]:
    events = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    metrics_csv: Path
    metrics_json: Path
    trace_path: Path
    config_path: Path
    rows: list[MetricsRow]


def run_experiment(cfg: RunConfig, out_dir: str | Path | None = None) -> RunArtifacts:
    """Run one simulation and write metrics, trace, and the echoed config."""
    result = run_simulation(cfg)
    out_dir = Path(out_dir or cfg.output_dir or f"results/run-{result.run_id}")
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path = echo_config(cfg, out_dir)
    rows = rows_from_round_metrics(result.run_id, cfg.seed, result.rounds)
    metrics_csv = export_metrics(rows, "csv", out_dir / "metrics.csv")
    metrics_json = export_metrics(rows, "json", out_dir / "metrics.json")
    trace_path = write_trace(result.trace, out_dir / "trace.jsonl")
    return RunArtifacts(
        out_dir=out_dir,
        metrics_csv=metrics_csv,
        metrics_json=metrics_json,
        trace_path=trace_path,
        config_path=config_path,
        rows=rows,
    )


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian experiment grid over the headline parameters.

    ``replicates`` names the per-cell repetition labels; each cell's run seed
    is derived from the sweep master seed and the cell label, so adding cells
    or reordering execution never perturbs existing results.
    """

    feeders: tuple[int, ...]
    malicious_fractions: tuple[float, ...]
    alpha_bands: tuple[tuple[float, float], ...]
    strategies: tuple[str, ...]
    replicates: tuple[int, ...]

    def cells(self) -> list[dict]:
        out = []
        for n, s, band, strategy, rep in product(
            self.feeders,
            self.malicious_fractions,
            self.alpha_bands,
            self.strategies,
            self.replicates,
        ):
            out.append(
                {
                    "feeders_per_round": n,
                    "malicious_fraction": s,
                    "alpha_band": band,
                    "strategy": strategy,
                    "replicate": rep,
                }
            )
        return out


def cell_label(cell: dict) -> str:
    band = band_label(cell["alpha_band"])
    return (
        f"n={cell['feeders_per_round']},s={cell['malicious_fraction']:g},"
        f"alpha={band},strategy={cell['strategy']},rep={cell['replicate']}"
    )


def cell_config(base: RunConfig, cell: dict) -> RunConfig:
    label = cell_label(cell)
    return dataclasses.replace(
        base,
        feeders_per_round=cell["feeders_per_round"],
        malicious_fraction=cell["malicious_fraction"],
        alpha_band=cell["alpha_band"],
        strategy=cell["strategy"],
        seed=derive_label_seed(base.seed, label),
        output_dir=None,
    )


def _run_cell(args: tuple[RunConfig, dict]) -> tuple[str, list[MetricsRow] | None, str | None]:
    base, cell = args
    label = cell_label(cell)
    try:
        cfg = cell_config(base, cell)
        result = run_simulation(cfg)
        rows = rows_from_round_metrics(label, cfg.seed, result.rounds)
        return label, rows, None
    except Exception as exc:  # cell failures are recorded, the sweep continues
        return label, None, f"{type(exc).__name__}: {exc}"


@dataclass(frozen=True)
class SweepResult:
    rows: list[MetricsRow]
    failures: dict[str, str]
    combined_csv: Path | None


def run_sweep(
    base: RunConfig,
    grid: SweepGrid,
    out_dir: str | Path | None = None,
    workers: int = 1,
) -> SweepResult:
    """Run every grid cell, merge rows deterministically, write the combined CSV."""
    cells = grid.cells()
    if not cells:
        raise DomainError("sweep grid is empty")
    jobs = [(base, cell) for cell in cells]
    outcomes: list[tuple[str, list[MetricsRow] | None, str | None]] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs))
    else:
        outcomes = [_run_cell(job) for job in jobs]

    rows: list[MetricsRow] = []
    failures: dict[str, str] = {}
    for label, cell_rows, error in outcomes:
        if error is not None:
            failures[label] = error
        else:
            rows.extend(cell_rows)
    # canonical order: independent of execution interleaving
    rows.sort(key=lambda r: (r.run_id, r.round_index))

    combined = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        combined = export_metrics(rows, "csv", out_path / "sweep-metrics.csv")
        if failures:
            (out_path / "failures.json").write_text(
                json.dumps(failures, indent=2, sort_keys=True) + "\n"
            )
    return SweepResult(rows=rows, failures=failures, combined_csv=combined)


def replay_trace(path: str | Path) -> list[MetricsRow]:
    """Recompute the metrics rows from a trace log alone."""
    events = read_trace(path)
    if not events or events[0].get("event") != "header":
        raise DomainError(f"trace {path} does not start with a header event")
    header = events[0]
    bins = header["entropy_bins"]
    range_bound = header["entropy_range_bound"]
    tolerance = header["tolerance"]
    noise_ratio = header["honest_noise_ratio"]

    kinds: dict[str, str] = {}
    rounds: dict[int, dict] = {}

    def bucket(round_index: int) -> dict:
        return rounds.setdefault(
            round_index,
            {
                "deviations": [],
                "falsified": set(),
                "tested": set(),
                "failed": set(),
                "blacklisted": set(),
            },
        )

    for event in events[1:]:
        name = event["event"]
        if name == "register":
            kinds[event["node"]] = event["kind"]
        elif name == "round":
            bucket(event["round"])
        elif name == "dispatch":
            if event["covert"]:
                bucket(event["round"])["tested"].add(event["node"])
        elif name == "report":
            b = bucket(event["round"])
            deviation = abs(event["value"] - event["truth"])
            b["deviations"].append(deviation)
            if deviation > noise_ratio * event["tolerance"]:
                b["falsified"].add(event["node"])
        elif name == "verdict":
            if event["outcome"] == "failed":
                bucket(event["round"])["failed"].add(event["node"])
        elif name == "blacklist":
            bucket(event["round"])["blacklisted"].add(event["node"])

    malicious_total = sum(1 for kind in kinds.values() if kind == "malicious")
    removed_malicious = 0
    rows = []
    for round_index in sorted(rounds):
        b = rounds[round_index]
        removed_malicious += sum(
            1 for n in b["blacklisted"] if kinds.get(n) == "malicious"
        )
        falsifying_tested = b["falsified"] & b["tested"]
        rows.append(
            MetricsRow(
                run_id=header["run_id"],
                strategy=header["strategy"],
                alpha_band=header["alpha_band"],
                seed=header["seed"],
                round_index=round_index,
                entropy=deviation_entropy(b["deviations"], bins, range_bound),
                detection_success_rate=detection_success_rate(
                    b["failed"], falsifying_tested
                ),
                feed_accuracy=feed_accuracy(b["deviations"], tolerance),
                true_malicious_active=malicious_total - removed_malicious,
                malicious_detected=sum(
                    1 for n in b["failed"] if kinds.get(n) == "malicious"
                ),
            )
        )
    return rows
