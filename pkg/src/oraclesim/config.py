"""Run configuration: defaults, JSON parsing, validation, and echoing.

A config file is a JSON object whose keys mirror :class:`RunConfig` fields,
with reputation parameters under a nested ``"reputation"`` section.  Values
given on the command line override file values.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .reputation import ReputationParams

STRATEGIES = ("dectest", "weighted_random", "pure_random", "dos_like")

ALPHA_BANDS = {
    "0.01-0.05": (0.01, 0.05),
    "0.1-0.3": (0.1, 0.3),
    "0.4-0.6": (0.4, 0.6),
}


def band_label(band: tuple[float, float]) -> str:
    return f"{band[0]:g}-{band[1]:g}"


@dataclass(frozen=True)
class RunConfig:
    population: int = 500
    feeders_per_round: int = 50
    malicious_fraction: float = 0.2
    misbehavior_probability: float = 0.8
    rounds: int = 60
    committee_size: int = 5
    cyc: int = 5
    alpha_band: tuple[float, float] = (0.01, 0.05)
    strategy: str = "dectest"
    theta_prov: int = 0
    theta_black: int = 1
    registration_deposit: float = 100.0
    min_deposit: float = 100.0
    deposit_deduction_fraction: float = 0.10
    reward_per_pass: float = 1.0
    regular_tasks_per_round: int = 20
    num_sources: int = 50
    tests_per_round: int | None = None  # None: one test per selected feeder
    base_tolerance: float = 1.0
    source_tolerance_range: tuple[float, float] = (0.5, 2.0)
    honest_noise_ratio: float = 0.5
    falsification_range: tuple[float, float] = (5.0, 10.0)
    truth_walk_step: float = 0.2
    honest_rt_mu: float = 0.0
    honest_rt_sigma: float = 0.25
    malicious_rt_mu: float = 0.1
    malicious_rt_sigma: float = 0.4
    false_accusation_probability: float = 0.1
    dos_quorum_size: int | None = None  # None: same as feeders_per_round
    weight_floor: float = 1e-6
    entropy_bins: int = 20
    entropy_range_tolerances: float = 10.0
    seed: int = 42
    output_dir: str | None = None
    reputation: ReputationParams = field(default_factory=ReputationParams)

    @property
    def effective_tests_per_round(self) -> int:
        return self.tests_per_round if self.tests_per_round is not None else self.feeders_per_round

    @property
    def effective_dos_quorum(self) -> int:
        return self.dos_quorum_size if self.dos_quorum_size is not None else self.feeders_per_round

    @property
    def alpha_band_label(self) -> str:
        return band_label(self.alpha_band)

    def run_id(self) -> str:
        canonical = json.dumps(config_to_dict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


_REPUTATION_FIELDS = {f.name for f in dataclasses.fields(ReputationParams)}
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def validate_config(cfg: RunConfig) -> dict[str, str]:
    """Return a field -> message map of validation failures (empty if valid)."""
    bad: dict[str, str] = {}
    if cfg.population <= 0:
        bad["population"] = "must be positive"
    if not 0 < cfg.feeders_per_round <= cfg.population:
        bad["feeders_per_round"] = f"must be in [1, population={cfg.population}]"
    if not 0.0 <= cfg.malicious_fraction <= 1.0:
        bad["malicious_fraction"] = "must be in [0, 1]"
    if not 0.0 <= cfg.misbehavior_probability <= 1.0:
        bad["misbehavior_probability"] = "must be in [0, 1]"
    if cfg.rounds < 0:
        bad["rounds"] = "must be non-negative"
    if cfg.committee_size < 3:
        bad["committee_size"] = "must be at least 3"
    if cfg.committee_size + cfg.feeders_per_round > cfg.population:
        bad["committee_size"] = (
            "committee_size + feeders_per_round must not exceed population"
        )
    if cfg.cyc <= 0:
        bad["cyc"] = "must be positive"
    lo, hi = cfg.alpha_band
    if not 0.0 <= lo <= hi < 1.0:
        bad["alpha_band"] = "must satisfy 0 <= low <= high < 1"
    if cfg.strategy not in STRATEGIES:
        bad["strategy"] = f"must be one of {', '.join(STRATEGIES)}"
    if not 0 <= cfg.theta_prov < cfg.theta_black:
        bad["theta_prov"] = "need 0 <= theta_prov < theta_black"
    if cfg.registration_deposit < cfg.min_deposit:
        bad["registration_deposit"] = "must be at least min_deposit"
    if cfg.min_deposit < 0:
        bad["min_deposit"] = "must be non-negative"
    if not 0.0 <= cfg.deposit_deduction_fraction <= 1.0:
        bad["deposit_deduction_fraction"] = "must be in [0, 1]"
    if cfg.reward_per_pass < 0:
        bad["reward_per_pass"] = "must be non-negative"
    if cfg.regular_tasks_per_round < 0:
        bad["regular_tasks_per_round"] = "must be non-negative"
    if cfg.num_sources <= 0:
        bad["num_sources"] = "must be positive"
    if cfg.tests_per_round is not None and not 0 <= cfg.tests_per_round <= cfg.feeders_per_round:
        bad["tests_per_round"] = "must be in [0, feeders_per_round]"
    if cfg.base_tolerance <= 0:
        bad["base_tolerance"] = "must be positive"
    tlo, thi = cfg.source_tolerance_range
    if not 0 < tlo <= thi:
        bad["source_tolerance_range"] = "must satisfy 0 < low <= high"
    if not 0.0 <= cfg.honest_noise_ratio < 1.0:
        bad["honest_noise_ratio"] = "must be in [0, 1) tolerance units"
    flo, fhi = cfg.falsification_range
    if not 1.0 < flo <= fhi:
        bad["falsification_range"] = "must satisfy 1 < low <= high tolerance units"
    if cfg.truth_walk_step < 0:
        bad["truth_walk_step"] = "must be non-negative"
    for name in ("honest_rt_sigma", "malicious_rt_sigma"):
        if getattr(cfg, name) < 0:
            bad[name] = "must be non-negative"
    if not 0.0 <= cfg.false_accusation_probability <= 1.0:
        bad["false_accusation_probability"] = "must be in [0, 1]"
    if cfg.dos_quorum_size is not None and cfg.dos_quorum_size <= 0:
        bad["dos_quorum_size"] = "must be positive"
    if cfg.weight_floor <= 0:
        bad["weight_floor"] = "must be positive"
    if cfg.entropy_bins <= 0:
        bad["entropy_bins"] = "must be positive"
    if cfg.entropy_range_tolerances <= 0:
        bad["entropy_range_tolerances"] = "must be positive"
    if cfg.seed < 0:
        bad["seed"] = "must be non-negative"
    return bad


def _coerce_pair(name: str, value) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError({name: "must be a pair of numbers"})
    return (float(value[0]), float(value[1]))


def config_from_dict(data: dict) -> RunConfig:
    """Build a validated RunConfig from a plain dict (e.g. parsed JSON)."""
    unknown = {
        k: "unknown key" for k in data if k not in _CONFIG_FIELDS
    }
    rep_data = data.get("reputation", {}) or {}
    if not isinstance(rep_data, dict):
        raise ConfigError({"reputation": "must be an object"})
    unknown.update(
        {f"reputation.{k}": "unknown key" for k in rep_data if k not in _REPUTATION_FIELDS}
    )
    if unknown:
        raise ConfigError(unknown)

    kwargs = {k: v for k, v in data.items() if k != "reputation"}
    for pair_field in ("alpha_band", "source_tolerance_range", "falsification_range"):
        if pair_field in kwargs:
            kwargs[pair_field] = _coerce_pair(pair_field, kwargs[pair_field])
    try:
        reputation = ReputationParams(**rep_data)
    except Exception as exc:
        raise ConfigError({"reputation": str(exc)}) from exc
    try:
        cfg = RunConfig(reputation=reputation, **kwargs)
    except TypeError as exc:
        raise ConfigError({"config": str(exc)}) from exc

    bad = validate_config(cfg)
    if bad:
        raise ConfigError(bad)
    return cfg


def config_to_dict(cfg: RunConfig) -> dict:
    data = dataclasses.asdict(cfg)
    for pair_field in ("alpha_band", "source_tolerance_range", "falsification_range"):
        data[pair_field] = list(data[pair_field])
    return data


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Load a config file (all fields optional) and apply overrides on top."""
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError({"config_file": f"cannot read {path}: {exc}"}) from exc
        if text.strip():
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError({"config_file": f"invalid JSON in {path}: {exc}"}) from exc
        if not isinstance(data, dict):
            raise ConfigError({"config_file": "top level must be a JSON object"})
    for key, value in (overrides or {}).items():
        if key == "reputation":
            merged = dict(data.get("reputation", {}))
            merged.update(value)
            data["reputation"] = merged
        else:
            data[key] = value
    return config_from_dict(data)


def echo_config(cfg: RunConfig, directory: str | Path) -> Path:
    """Write the effective configuration into the output directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "effective-config.json"
    path.write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")
    return path
