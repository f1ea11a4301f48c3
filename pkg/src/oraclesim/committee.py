"""Question-verification committee: covert drafting, hybrid release, verification,
accusation adjudication, and epoch rotation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .domain import CommitteeState, TaskRequest, TestCase
from .errors import ContractViolationError, DomainError, DraftingError
from .reputation import ReputationParams, committee_reward
from .selection import select_committee


@dataclass(frozen=True)
class Verdict:
    task_id: str
    node_id: str
    outcome: str  # "passed" | "failed"
    reported_value: float
    expected_value: float


@dataclass(frozen=True)
class Accusation:
    accuser: str
    accused: str
    evidence: tuple[str, ...]  # task ids whose expected values were tampered with


@dataclass(frozen=True)
class Ruling:
    upheld: bool
    removed: str | None
    promoted: str | None
    penalized: str | None


@dataclass
class TestCaseRepository:
    """Verified test cases keyed by case id; cases are consumed once drafted."""

    cases: dict[str, TestCase] = field(default_factory=dict)
    used: set[str] = field(default_factory=set)
    _counter: int = 0

    def provision(self, source: str, expected_value: float, tolerance: float) -> TestCase:
        case = TestCase(
            case_id=f"case-{self._counter:06d}",
            source=source,
            expected_value=expected_value,
            tolerance=tolerance,
        )
        self._counter += 1
        self.cases[case.case_id] = case
        return case

    def unused_count(self) -> int:
        return len(self.cases) - len(self.used)

    def lookup(self, case_id: str) -> TestCase:
        return self.cases[case_id]

    def draw_unused(self, count: int) -> list[TestCase]:
        if count > self.unused_count():
            raise DraftingError(
                f"repository holds {self.unused_count()} unused cases, need {count}"
            )
        drawn = []
        for case_id in sorted(self.cases):
            if case_id in self.used:
                continue
            self.used.add(case_id)
            drawn.append(self.cases[case_id])
            if len(drawn) == count:
                break
        return drawn


def draft_test_tasks(
    repo: TestCaseRepository,
    count: int,
    round_index: int,
    state: CommitteeState,
    task_counter: int,
) -> list[TaskRequest]:
    """Draft covert test tasks from distinct unused repository cases.

    The cases were provisioned from the same source distribution as regular
    tasks, so a drafted query is indistinguishable from a regular one.  The
    questioner's contribution and the cycle task tally are advanced here.
    """
    if count < 0:
        raise DomainError(f"count must be non-negative, got {count}")
    if count == 0:
        return []
    cases = repo.draw_unused(count)
    tasks = []
    for i, case in enumerate(cases):
        tasks.append(
            TaskRequest(
                task_id=f"task-{task_counter + i:08d}",
                source=case.source,
                covert=True,
                release_slot=round_index,
                case_id=case.case_id,
            )
        )
    state.tasks_issued += count
    state.add_contribution(state.questioner, float(count))
    return tasks


def schedule_release(
    test_tasks: list[TaskRequest],
    regular_tasks: list[TaskRequest],
    rng: random.Random,
) -> list[TaskRequest]:
    """Interleave covert tasks at uniformly random positions among regular ones.

    Both subsequences keep their internal order; the interleaving is uniform
    over all possible position choices for the test tasks.
    """
    total = len(test_tasks) + len(regular_tasks)
    if not test_tasks:
        return list(regular_tasks)
    positions = set(rng.sample(range(total), len(test_tasks)))
    schedule: list[TaskRequest] = []
    test_iter = iter(test_tasks)
    regular_iter = iter(regular_tasks)
    for slot in range(total):
        schedule.append(next(test_iter) if slot in positions else next(regular_iter))
    return schedule


def verify_feed(task_id: str, node_id: str, reported_value: float, case: TestCase) -> Verdict:
    """Compare a node's report against the test case, inclusive at the boundary."""
    deviation = abs(reported_value - case.expected_value)
    outcome = "passed" if deviation <= case.tolerance else "failed"
    return Verdict(
        task_id=task_id,
        node_id=node_id,
        outcome=outcome,
        reported_value=reported_value,
        expected_value=case.expected_value,
    )


def adjudicate_accusation(
    accusation: Accusation,
    state: CommitteeState,
    planted_expected: dict[str, float],
    canonical_expected: dict[str, float],
) -> Ruling:
    """Judge an accusation against the questioner using repository ground truth.

    ``planted_expected`` holds the expected values the questioner actually used
    per task; ``canonical_expected`` the repository's values.  A confirmed
    mismatch removes the questioner and promotes the accuser; a refuted claim
    penalizes the accuser.  Malformed accusations are rejected without penalty.
    """
    if accusation.accuser not in state.validators or accusation.accused != state.questioner:
        return Ruling(upheld=False, removed=None, promoted=None, penalized=None)

    tampered = any(
        task_id in planted_expected
        and task_id in canonical_expected
        and planted_expected[task_id] != canonical_expected[task_id]
        for task_id in accusation.evidence
    )
    state.add_contribution(state.judge, 1.0)
    if tampered:
        return Ruling(
            upheld=True,
            removed=accusation.accused,
            promoted=accusation.accuser,
            penalized=accusation.accused,
        )
    return Ruling(upheld=False, removed=None, promoted=None, penalized=accusation.accuser)


@dataclass(frozen=True)
class RotationResult:
    state: CommitteeState
    rotated: bool
    reward: float | None
    reward_shares: dict[str, float] | None


def rotate_committee(
    state: CommitteeState,
    round_index: int,
    candidates: dict[str, bytes],
    round_seed: bytes,
    member_reputations: dict[str, float],
    params: ReputationParams,
    committee_size: int,
    forced_questioner: str | None = None,
) -> RotationResult:
    """Settle the ending cycle and elect a fresh committee every ``cyc`` rounds.

    Off rotation boundaries the state is returned unchanged.  On rotation the
    outgoing members' group reward is computed from normalized contribution
    tallies and split in proportion to them; a promoted accuser, when present,
    takes the questioner seat in the incoming committee.
    """
    if round_index < 0:
        raise DomainError(f"round_index must be non-negative, got {round_index}")
    if round_index == 0 or round_index % state.cyc != 0:
        return RotationResult(state=state, rotated=False, reward=None, reward_shares=None)

    members = state.members
    raw = [state.contributions.get(m, 0.0) for m in members]
    reward = None
    shares: dict[str, float] = {}
    if sum(raw) > 0:
        total = sum(raw)
        normalized = [w / total for w in raw]
        reward = committee_reward(
            [member_reputations[m] for m in members],
            normalized,
            state.tasks_issued,
            state.cyc,
            params,
        )
        shares = {m: reward * w for m, w in zip(members, normalized) if w > 0}

    fresh = select_committee(
        candidates, committee_size, round_seed, epoch=state.epoch + 1, cyc=state.cyc
    )
    if forced_questioner is not None and forced_questioner in candidates:
        fresh = _install_questioner(fresh, forced_questioner)
    return RotationResult(state=fresh, rotated=True, reward=reward, reward_shares=shares)


def _install_questioner(state: CommitteeState, node_id: str) -> CommitteeState:
    if node_id == state.questioner:
        return state
    size = len(state.members)
    # promoted node takes the first seat; elected members keep their order
    seats = [node_id] + [m for m in state.members if m != node_id]
    seats = seats[:size]
    return CommitteeState(
        questioner=seats[0],
        judge=seats[1],
        validators=tuple(seats[2:]),
        epoch=state.epoch,
        cyc=state.cyc,
    )
