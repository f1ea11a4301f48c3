"""Coverage planning: how many uniform test rounds reach a node population.

``rounds_for_coverage`` answers how many rounds of sampling N of M nodes are
needed before every node has been tested at least once with probability P;
``cycles_for_coverage`` converts rounds into chain cycles given throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

# beyond this many rounds the exact rational check is skipped (huge powers);
# the float estimate with an epsilon guard is used instead
_EXACT_LIMIT = 5000


@dataclass(frozen=True)
class CoveragePlan:
    population: int
    sample_size: int
    confidence: float
    rounds: int
    tx_per_second: float
    tests_per_cycle: float
    cycle_capacity: float
    cycles: int


def rounds_for_coverage(population: int, sample_size: int, confidence: float) -> int:
    """Rounds of uniform sample_size-of-population testing for the target coverage.

    The round count K satisfies 1 - (1 - N/M)^K >= P, computed so the ceiling
    never under-rounds across an integer boundary: the float estimate is
    verified (and corrected) against the exact rational inequality
    ((M-N)/M)^K <= 1-P.
    """
    if population <= 0:
        raise DomainError(f"population must be positive, got {population}")
    if not 1 <= sample_size <= population:
        raise DomainError(
            f"sample_size must be in [1, {population}], got {sample_size}"
        )
    if not 0.0 <= confidence < 1.0:
        raise DomainError(f"confidence must be in [0, 1), got {confidence}")

    if confidence == 0.0:
        return 0
    if sample_size == population:
        return 1

    estimate = math.log1p(-confidence) / math.log1p(-sample_size / population)
    k = max(1, math.ceil(estimate - 1e-12))

    if k <= _EXACT_LIMIT:
        miss = Fraction(population - sample_size, population)
        target = Fraction(1) - Fraction(confidence)
        while miss**k > target:
            k += 1
        while k > 1 and miss ** (k - 1) <= target:
            k -= 1
    return k


def cycles_for_coverage(
    tests_per_cycle: float, rounds: int, tx_per_second: float, cycle_capacity: float
) -> int:
    """Chain cycles needed to push rounds * tests_per_cycle test transactions."""
    if tests_per_cycle <= 0:
        raise DomainError(f"tests_per_cycle must be positive, got {tests_per_cycle}")
    if rounds < 0:
        raise DomainError(f"rounds must be non-negative, got {rounds}")
    if tx_per_second <= 0:
        raise DomainError(f"tx_per_second must be positive, got {tx_per_second}")
    if cycle_capacity <= 0:
        raise DomainError(f"cycle_capacity must be positive, got {cycle_capacity}")

    if rounds == 0:
        return 0
    exact = Fraction(tests_per_cycle) * rounds / (Fraction(tx_per_second) * Fraction(cycle_capacity))
    return math.ceil(exact)


def plan_coverage(
    population: int,
    sample_size: int,
    confidence: float,
    tx_per_second: float,
    tests_per_cycle: float,
    cycle_capacity: float,
) -> CoveragePlan:
    rounds = rounds_for_coverage(population, sample_size, confidence)
    cycles = cycles_for_coverage(tests_per_cycle, rounds, tx_per_second, cycle_capacity)
    return CoveragePlan(
        population=population,
        sample_size=sample_size,
        confidence=confidence,
        rounds=rounds,
        tx_per_second=tx_per_second,
        tests_per_cycle=tests_per_cycle,
        cycle_capacity=cycle_capacity,
        cycles=cycles,
    )


def empirical_coverage(
    population: int, sample_size: int, rounds: int, trials: int, seed: int = 0
) -> float:
    """Monte Carlo estimate of per-node coverage after ``rounds`` uniform rounds.

    Fraction of trials in which a designated node appears at least once in
    ``rounds`` independent uniform samples of ``sample_size`` distinct nodes.
    A node's rank in a uniform random permutation of the population is uniform
    on [0, population), and the sample is the first ``sample_size`` ranks, so
    per-round membership is simulated by one uniform integer draw.
    """
    if population <= 0:
        raise DomainError(f"population must be positive, got {population}")
    if not 1 <= sample_size <= population:
        raise DomainError(
            f"sample_size must be in [1, {population}], got {sample_size}"
        )
    if rounds < 0:
        raise DomainError(f"rounds must be non-negative, got {rounds}")
    if trials <= 0:
        raise DomainError(f"trials must be positive, got {trials}")

    if rounds == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    ranks = rng.integers(0, population, size=(trials, rounds))
    covered = (ranks < sample_size).any(axis=1)
    return float(covered.mean())
