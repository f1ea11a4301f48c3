"""Round evaluation metrics and their CSV/JSON serialization.

All metrics are pure functions of per-round report/verdict data, so a trace
replay reproduces them bit for bit.  Undefined metrics are ``None`` and
serialize as an empty CSV cell / JSON null, never as zero.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DomainError

CSV_COLUMNS = [
    "run_id",
    "strategy",
    "alpha_band",
    "seed",
    "round",
    "entropy",
    "detection_success_rate",
    "feed_accuracy",
    "true_malicious_active",
    "malicious_detected",
]

DEFAULT_BINS = 20
DEFAULT_RANGE_TOLERANCES = 10.0


@dataclass(frozen=True)
class RoundMetrics:
    round_index: int
    entropy: float | None
    detection_success_rate: float | None
    feed_accuracy: float | None
    true_malicious_active: int
    malicious_detected: int
    strategy: str
    alpha_band: str

    def __post_init__(self) -> None:
        if self.entropy is not None and self.entropy < 0:
            raise DomainError(f"entropy must be non-negative, got {self.entropy}")
        for name in ("detection_success_rate", "feed_accuracy"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must be in [0, 1], got {v}")


def deviation_entropy(
    deviations: Sequence[float], bins: int, range_bound: float
) -> float | None:
    """Shannon entropy (bits) of the binned |report - truth| distribution.

    Deviations are histogrammed into equal-width bins over [0, range_bound],
    with anything beyond the bound landing in the last bin.  Low entropy means
    reports concentrate near the truth.  Returns ``None`` with no reports.
    """
    if bins <= 0:
        raise DomainError(f"bins must be positive, got {bins}")
    if range_bound <= 0:
        raise DomainError(f"range_bound must be positive, got {range_bound}")
    if not deviations:
        return None
    counts = [0] * bins
    width = range_bound / bins
    for d in deviations:
        if d < 0:
            raise DomainError(f"deviations must be non-negative, got {d}")
        counts[min(int(d / width), bins - 1)] += 1
    total = len(deviations)
    entropy = 0.0
    for c in counts:
        if c:
            p = c / total
            entropy -= p * math.log2(p)
    return entropy


def detection_success_rate(
    failed_nodes: set[str], falsifying_tested_nodes: set[str]
) -> float | None:
    """Fraction of actually-falsifying tested nodes whose verdict failed.

    Undefined (``None``) in rounds where no tested node falsified anything.
    """
    if not falsifying_tested_nodes:
        return None
    caught = len(falsifying_tested_nodes & failed_nodes)
    return caught / len(falsifying_tested_nodes)


def feed_accuracy(deviations: Sequence[float], tolerance: float) -> float | None:
    """Fraction of reports within tolerance of the ground truth."""
    if tolerance < 0:
        raise DomainError(f"tolerance must be non-negative, got {tolerance}")
    if not deviations:
        return None
    within = sum(1 for d in deviations if d <= tolerance)
    return within / len(deviations)


@dataclass(frozen=True)
class MetricsRow:
    """One exported row: run/cell labels plus one round's metrics."""

    run_id: str
    strategy: str
    alpha_band: str
    seed: int
    round_index: int
    entropy: float | None
    detection_success_rate: float | None
    feed_accuracy: float | None
    true_malicious_active: int
    malicious_detected: int

    def as_record(self) -> dict:
        return {
            "run_id": self.run_id,
            "strategy": self.strategy,
            "alpha_band": self.alpha_band,
            "seed": self.seed,
            "round": self.round_index,
            "entropy": self.entropy,
            "detection_success_rate": self.detection_success_rate,
            "feed_accuracy": self.feed_accuracy,
            "true_malicious_active": self.true_malicious_active,
            "malicious_detected": self.malicious_detected,
        }


def rows_from_round_metrics(
    run_id: str, seed: int, rounds: Iterable[RoundMetrics]
) -> list[MetricsRow]:
    return [
        MetricsRow(
            run_id=run_id,
            strategy=m.strategy,
            alpha_band=m.alpha_band,
            seed=seed,
            round_index=m.round_index,
            entropy=m.entropy,
            detection_success_rate=m.detection_success_rate,
            feed_accuracy=m.feed_accuracy,
            true_malicious_active=m.true_malicious_active,
            malicious_detected=m.malicious_detected,
        )
        for m in rounds
    ]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_metrics(rows: Sequence[MetricsRow], fmt: str, path: str | Path) -> Path:
    """Write rows as CSV or JSON with the fixed schema; returns the path."""
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for row in rows:
                    record = row.as_record()
                    writer.writerow([_cell(record[col]) for col in CSV_COLUMNS])
        elif fmt == "json":
            with path.open("w") as fh:
                json.dump([row.as_record() for row in rows], fh, indent=2)
                fh.write("\n")
        else:
            raise DomainError(f"format must be 'csv' or 'json', got {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc}") from exc
    return path


def load_metrics_csv(path: str | Path) -> list[MetricsRow]:
    """Parse a metrics CSV back into rows (empty cells become None)."""
    rows = []
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DomainError(f"metrics CSV missing columns: {', '.join(missing)}")
        for rec in reader:
            rows.append(
                MetricsRow(
                    run_id=rec["run_id"],
                    strategy=rec["strategy"],
                    alpha_band=rec["alpha_band"],
                    seed=int(rec["seed"]),
                    round_index=int(rec["round"]),
                    entropy=float(rec["entropy"]) if rec["entropy"] else None,
                    detection_success_rate=(
                        float(rec["detection_success_rate"])
                        if rec["detection_success_rate"]
                        else None
                    ),
                    feed_accuracy=(
                        float(rec["feed_accuracy"]) if rec["feed_accuracy"] else None
                    ),
                    true_malicious_active=int(rec["true_malicious_active"]),
                    malicious_detected=int(rec["malicious_detected"]),
                )
            )
    return rows
