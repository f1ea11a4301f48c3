"""Reputation calculus: cap decay, accuracy, weights, timing, rewards, punishment.

All operations are pure functions of their arguments.  The parameter set is
carried in :class:`ReputationParams`; defaults keep the update multiplier in
(1, 2] and make punishment strictly shrinking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

# value returned when a node has no test history / no timing history yet
UNTESTED_ACCURACY = 0.0
NO_HISTORY_SCORE = 0.0


@dataclass(frozen=True)
class ReputationParams:
    cap_threshold: float = 1000.0  # reputation level where decay starts
    decay_scale: float = 200.0
    accuracy_weight: float = 0.5
    weight_weight: float = 0.3
    timing_weight: float = 0.2
    diversity_factor: float = 1.0
    punish_base: int = 9
    punish_offset: float = 1.0
    punish_adjust: float = 0.0
    workload_exponent: float = 1.0
    workload_min: float = 0.5
    workload_max: float = 2.0
    rt_orientation: str = "literal"  # or "inverted": score 1/(1+RT) before sigmoid
    initial_reputation: float = 100.0

    def __post_init__(self) -> None:
        problems = []
        if self.cap_threshold <= 0:
            problems.append("cap_threshold must be positive")
        if self.decay_scale <= 0:
            problems.append("decay_scale must be positive")
        for name in ("accuracy_weight", "weight_weight", "timing_weight"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                problems.append(f"{name} must be in (0, 1)")
        if self.diversity_factor <= 0:
            problems.append("diversity_factor must be positive")
        if self.punish_base < 1:
            problems.append("punish_base must be a positive integer")
        if self.punish_offset <= 0:
            problems.append("punish_offset must be positive")
        if self.punish_base + self.punish_offset <= 1.0:
            problems.append("punish_base + punish_offset must exceed 1")
        if self.punish_adjust < 0:
            problems.append("punish_adjust must be non-negative")
        if self.workload_exponent <= 0:
            problems.append("workload_exponent must be positive")
        if not 0.0 < self.workload_min <= self.workload_max:
            problems.append("need 0 < workload_min <= workload_max")
        if self.rt_orientation not in ("literal", "inverted"):
            problems.append("rt_orientation must be 'literal' or 'inverted'")
        if self.initial_reputation <= 0:
            problems.append("initial_reputation must be positive")
        if problems:
            raise DomainError("; ".join(problems))


# adjacent representable doubles keep sigmoid inside the open interval even
# where the exact value would round to 0.0 or 1.0
_SIGMOID_MIN = math.nextafter(0.0, 1.0)
_SIGMOID_MAX = math.nextafter(1.0, 0.0)


def sigmoid(x: float) -> float:
    """Logistic map onto the open interval (0, 1), overflow-safe for large |x|."""
    if x >= 0:
        v = 1.0 / (1.0 + math.exp(-x))
    else:
        e = math.exp(x)
        v = e / (1.0 + e)
    return min(max(v, _SIGMOID_MIN), _SIGMOID_MAX)


def apply_reputation_cap(reputation: float, params: ReputationParams) -> float:
    """Exponentially damp reputation above the cap threshold.

    Below the threshold the score passes through unchanged; above it the score
    is divided by e^((R - cap)/scale), which is continuous at the boundary.
    """
    if reputation <= 0:
        raise DomainError(f"reputation must be positive, got {reputation}")
    if reputation <= params.cap_threshold:
        return reputation
    return reputation / math.exp((reputation - params.cap_threshold) / params.decay_scale)


def accuracy_score(tests_passed_total: int, tests_assigned: Sequence[int]) -> float:
    """Fraction of assigned test tasks completed correctly.

    A node with no assigned tests yet gets the untested default (0.0): test
    accuracy must be earned, never presumed.
    """
    total = sum(tests_assigned)
    if total == 0:
        return UNTESTED_ACCURACY
    if tests_passed_total < 0 or tests_passed_total > total:
        raise DomainError(
            f"tests_passed_total must be in [0, {total}], got {tests_passed_total}"
        )
    return tests_passed_total / total


def reputation_weight(
    accumulated_reputations: Sequence[float],
    index: int,
    diversity_factor: float = 1.0,
    total: float | None = None,
) -> float:
    """Node's accumulated reputation relative to the population mean.

    Scaled by the diversity adjustment factor; the population mean of this
    score equals the diversity factor by construction.  ``total`` may carry a
    precomputed population sum when scoring many nodes.
    """
    if len(accumulated_reputations) == 0:
        raise DomainError("population must be non-empty")
    if total is None:
        if any(r <= 0 for r in accumulated_reputations):
            raise DomainError("all accumulated reputations must be positive")
        total = sum(accumulated_reputations)
    n = len(accumulated_reputations)
    return n * accumulated_reputations[index] / total * diversity_factor


def diversity_adjustment(
    distinct_sources: int, total_sources: int, population: int,
    low: float = 0.5, high: float = 2.0,
) -> float:
    """Optional diversity factor from the share of distinct sources served."""
    if total_sources <= 0 or population <= 0:
        raise DomainError("total_sources and population must be positive")
    raw = 1.0 + (distinct_sources / total_sources - 1.0 / population)
    return min(max(raw, low), high)


def response_time_score(times: Sequence[float], population: int) -> float:
    """Dispersion of a node's response times: coefficient of variation over N.

    Empty history returns the no-history default (0.0).  Uses the population
    standard deviation, so a single sample scores 0.
    """
    if population < 1:
        raise DomainError(f"population must be >= 1, got {population}")
    m = len(times)
    if m == 0:
        return NO_HISTORY_SCORE
    if any(t <= 0 for t in times):
        raise DomainError("response times must be positive")
    mean = sum(times) / m
    var = sum((t - mean) ** 2 for t in times) / m
    cv = math.sqrt(var) / mean
    return cv / population


def response_time_score_from_sums(
    count: int, total: float, sq_total: float, population: int
) -> float:
    """Same score as :func:`response_time_score`, from running sums."""
    if population < 1:
        raise DomainError(f"population must be >= 1, got {population}")
    if count == 0:
        return NO_HISTORY_SCORE
    mean = total / count
    var = max(sq_total / count - mean * mean, 0.0)
    return math.sqrt(var) / mean / population


def update_reputation(
    accuracy: float,
    rep_weight: float,
    rt_score: float,
    params: ReputationParams,
    accumulated_reputation: float,
) -> float:
    """Recompute reputation from the accumulated base and the three components.

    The weight and timing components pass through a sigmoid so the multiplier
    stays in (1, 1 + sum of component weights).  The caller applies the
    reputation cap afterwards.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise DomainError(f"accuracy must be in [0, 1], got {accuracy}")
    if accumulated_reputation <= 0:
        raise DomainError(
            f"accumulated_reputation must be positive, got {accumulated_reputation}"
        )
    rt = rt_score if params.rt_orientation == "literal" else 1.0 / (1.0 + rt_score)
    multiplier = (
        params.accuracy_weight * accuracy
        + params.weight_weight * sigmoid(rep_weight)
        + params.timing_weight * sigmoid(rt)
        + 1.0
    )
    return multiplier * accumulated_reputation


def committee_reward(
    member_reputations: Sequence[float],
    contribution_weights: Sequence[float],
    tasks_in_cycle: float,
    cycle_length: float,
    params: ReputationParams,
) -> float:
    """Group reward for a committee cycle.

    Contribution-weighted mean member reputation, scaled by the clamped
    workload ratio raised to the workload exponent.  Callers normalize the
    contribution weights to sum to 1, which makes the reward invariant under
    common positive scaling of raw contribution tallies.
    """
    n = len(member_reputations)
    if n == 0:
        raise DomainError("committee must be non-empty")
    if len(contribution_weights) != n:
        raise DomainError("one contribution weight per member required")
    if any(w < 0 for w in contribution_weights):
        raise DomainError("contribution weights must be non-negative")
    if sum(contribution_weights) <= 0:
        raise DomainError("at least one contribution weight must be positive")
    if tasks_in_cycle < 0:
        raise DomainError(f"tasks_in_cycle must be non-negative, got {tasks_in_cycle}")
    if cycle_length <= 0:
        raise DomainError(f"cycle_length must be positive, got {cycle_length}")

    weighted = sum(w * r for w, r in zip(contribution_weights, member_reputations))
    workload = min(max(tasks_in_cycle / cycle_length, params.workload_min), params.workload_max)
    return (weighted / n) * workload**params.workload_exponent


def punish(reputation: float, dishonest_count: int, params: ReputationParams) -> float:
    """Divide reputation by ln(base + offset) raised to the dishonesty count.

    With the default base + offset = 10 the log exceeds 1, so every additional
    dishonest completion shrinks reputation further.
    """
    if reputation <= 0:
        raise DomainError(f"reputation must be positive, got {reputation}")
    if dishonest_count < 0:
        raise DomainError(f"dishonest_count must be non-negative, got {dishonest_count}")
    base = params.punish_base + params.punish_offset
    if base <= 1.0:
        raise DomainError("punish_base + punish_offset must exceed 1")
    return reputation / math.log(base) ** (dishonest_count + params.punish_adjust)
