"""Core data types: oracle nodes, tasks, test cases, and the infraction ledger."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ContractViolationError


class NodeStatus(Enum):
    ACTIVE = "active"
    PROVISIONAL = "provisional"
    BLACKLISTED = "blacklisted"


class BehaviorKind(Enum):
    HONEST = "honest"
    MALICIOUS = "malicious"


@dataclass
class OracleNode:
    """A registered oracle node and its full per-run bookkeeping.

    ``reputation`` is the current score, ``accumulated_reputation`` the
    historical base it is recomputed from each settlement.  ``tests_assigned``
    and ``tests_passed`` are per-round counts within the current committee
    cycle; both reset when the accumulated reputation advances.
    """

    id: str
    deposit: float
    reputation: float
    accumulated_reputation: float
    selection_weight: float = 1.0
    response_times: list[float] = field(default_factory=list)
    tests_assigned: list[int] = field(default_factory=list)
    tests_passed: list[int] = field(default_factory=list)
    strikes: int = 0
    status: NodeStatus = NodeStatus.ACTIVE
    behavior: object | None = None
    # running sums over response_times so the dispersion score stays O(1)
    rt_sum: float = 0.0
    rt_sq_sum: float = 0.0
    sources_served: set[str] = field(default_factory=set)

    def record_response_time(self, t: float) -> None:
        self.response_times.append(t)
        self.rt_sum += t
        self.rt_sq_sum += t * t

    @property
    def selectable(self) -> bool:
        return self.status is not NodeStatus.BLACKLISTED


@dataclass(frozen=True)
class TaskView:
    """What a responding node sees of a task.

    Deliberately has no covertness field: node behavior cannot branch on
    whether a task is a committee test.
    """

    task_id: str
    source: str
    release_slot: int


@dataclass(frozen=True)
class TaskRequest:
    """A full task record as known to the harness and committee."""

    task_id: str
    source: str
    covert: bool
    release_slot: int
    case_id: str | None = None

    def view(self) -> TaskView:
        return TaskView(task_id=self.task_id, source=self.source, release_slot=self.release_slot)


@dataclass(frozen=True)
class TestCase:
    """A query with a verified expected answer from the case repository."""

    case_id: str
    source: str
    expected_value: float
    tolerance: float

    def __post_init__(self) -> None:
        if self.tolerance < 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance}")


@dataclass(frozen=True)
class StrikeReport:
    node_id: str
    strikes: int
    old_status: NodeStatus
    new_status: NodeStatus
    deposit_slashed: float


@dataclass
class InfractionLedger:
    """Strike counts plus the provisional registry and permanent blacklist.

    ``theta_prov`` and ``theta_black`` are the status thresholds: a node whose
    strike count exceeds ``theta_prov`` becomes provisional, and one whose
    count exceeds ``theta_black`` is blacklisted for the rest of the run.
    """

    theta_prov: int
    theta_black: int
    strikes: dict[str, int] = field(default_factory=dict)
    provisional: set[str] = field(default_factory=set)
    blacklist: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        if not 0 <= self.theta_prov < self.theta_black:
            raise ValueError(
                f"need 0 <= theta_prov < theta_black, got {self.theta_prov}, {self.theta_black}"
            )

    def is_blacklisted(self, node_id: str) -> bool:
        return node_id in self.blacklist


def record_strike(ledger: InfractionLedger, node: OracleNode) -> StrikeReport:
    """Register one dishonest test completion and apply status transitions.

    Transitions are monotone: active -> provisional -> blacklisted.  Crossing
    ``theta_black`` slashes the node's whole remaining deposit and removes it
    from every future selection pool.
    """
    if node.status is NodeStatus.BLACKLISTED:
        raise ContractViolationError(f"cannot strike blacklisted node {node.id}")

    old_status = node.status
    node.strikes += 1
    ledger.strikes[node.id] = node.strikes

    slashed = 0.0
    if node.strikes > ledger.theta_black:
        node.status = NodeStatus.BLACKLISTED
        ledger.provisional.discard(node.id)
        ledger.blacklist.add(node.id)
        slashed = node.deposit
        node.deposit = 0.0
    elif node.strikes > ledger.theta_prov and node.status is NodeStatus.ACTIVE:
        node.status = NodeStatus.PROVISIONAL
        ledger.provisional.add(node.id)

    return StrikeReport(
        node_id=node.id,
        strikes=node.strikes,
        old_status=old_status,
        new_status=node.status,
        deposit_slashed=slashed,
    )


@dataclass
class CommitteeState:
    """The question-verification committee for the current epoch."""

    questioner: str
    judge: str
    validators: tuple[str, ...]
    epoch: int
    cyc: int
    contributions: dict[str, float] = field(default_factory=dict)
    tasks_issued: int = 0

    def __post_init__(self) -> None:
        if len(self.members) < 3:
            raise ValueError("committee needs at least questioner, judge and one validator")
        if len(set(self.members)) != len(self.members):
            raise ValueError("committee roles must be disjoint")
        if self.cyc <= 0:
            raise ValueError("rotation interval must be positive")

    @property
    def members(self) -> tuple[str, ...]:
        return (self.questioner, self.judge) + self.validators

    def add_contribution(self, node_id: str, amount: float = 1.0) -> None:
        self.contributions[node_id] = self.contributions.get(node_id, 0.0) + amount
