"""Simulated chain layer: registration/payment/reputation state, synthetic data
sources, node behavior models, and the per-round workflow engine.

One :class:`Simulation` is a pure function of (config, master seed): every
random stream is derived from the seed, so a rerun reproduces the trace and
metrics byte for byte.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field

from .committee import (
    Accusation,
    TestCaseRepository,
    Verdict,
    adjudicate_accusation,
    draft_test_tasks,
    rotate_committee,
    schedule_release,
    verify_feed,
)
from .config import RunConfig, config_from_dict, config_to_dict, validate_config
from .domain import (
    BehaviorKind,
    CommitteeState,
    InfractionLedger,
    NodeStatus,
    OracleNode,
    TaskRequest,
    TaskView,
    record_strike,
)
from .errors import ConfigError, ContractViolationError, RegistrationError
from .metrics import RoundMetrics, deviation_entropy, detection_success_rate, feed_accuracy
from .reputation import (
    apply_reputation_cap,
    accuracy_score,
    punish,
    reputation_weight,
    response_time_score_from_sums,
    update_reputation,
)
from .selection import (
    WeightTable,
    adjust_weight_on_outcome,
    derive_label_seed,
    derive_round_seed,
    node_secret_key,
    select_committee,
    select_feeders,
    vrf_evaluate,
)

TRACE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BehaviorProfile:
    """How a node behaves when asked for data.

    Malicious nodes falsify each report independently with
    ``misbehavior_probability``; the falsified value is offset from the truth
    by ``falsify_low..falsify_high`` tolerances in a random direction.
    Response times are log-normal with the given parameters.
    """

    kind: BehaviorKind
    misbehavior_probability: float
    falsify_low: float
    falsify_high: float
    rt_mu: float
    rt_sigma: float

    def __post_init__(self) -> None:
        if self.kind is BehaviorKind.HONEST and self.misbehavior_probability != 0.0:
            raise ValueError("honest nodes must have zero misbehavior probability")
        if not 0.0 <= self.misbehavior_probability <= 1.0:
            raise ValueError("misbehavior_probability must be in [0, 1]")


@dataclass(frozen=True)
class DataReport:
    task_id: str
    node_id: str
    value: float
    response_time: float
    round_index: int


@dataclass
class GroundTruth:
    """Synthetic per-source truth series: base value plus a bounded noise walk."""

    sources: list[str]
    bases: dict[str, float]
    tolerances: dict[str, float]
    values: dict[str, float]
    walk_step: float
    walk_bound: float

    @classmethod
    def build(cls, cfg: RunConfig) -> "GroundTruth":
        sources = [f"src-{i:03d}" for i in range(cfg.num_sources)]
        lo, hi = cfg.source_tolerance_range
        bases = {}
        tolerances = {}
        for i, s in enumerate(sources):
            bases[s] = 50.0 + 10.0 * i
            frac = i / (cfg.num_sources - 1) if cfg.num_sources > 1 else 0.0
            tolerances[s] = cfg.base_tolerance * (lo + (hi - lo) * frac)
        return cls(
            sources=sources,
            bases=bases,
            tolerances=tolerances,
            values=dict(bases),
            walk_step=cfg.truth_walk_step * cfg.base_tolerance,
            walk_bound=10.0 * cfg.base_tolerance,
        )

    def advance(self, rng: random.Random) -> None:
        if self.walk_step == 0:
            return
        for s in self.sources:
            step = rng.uniform(-self.walk_step, self.walk_step)
            v = self.values[s] + step
            lo = self.bases[s] - self.walk_bound
            hi = self.bases[s] + self.walk_bound
            self.values[s] = min(max(v, lo), hi)

    def value_of(self, source: str) -> float:
        return self.values[source]

    def tolerance_of(self, source: str) -> float:
        return self.tolerances[source]


@dataclass
class ChainState:
    """On-chain bookkeeping: the registered population and the money flows."""

    ledger: InfractionLedger
    nodes: dict[str, OracleNode] = field(default_factory=dict)
    initial_deposit_total: float = 0.0
    rewards_minted: float = 0.0
    slashed_total: float = 0.0
    dispatched: set[str] = field(default_factory=set)
    response_count: int = 0
    round_counter: int = 0

    def deposits_total(self) -> float:
        return sum(n.deposit for n in self.nodes.values())

    def selectable_nodes(self) -> list[OracleNode]:
        return [n for n in self.nodes.values() if n.selectable]


def register_node(
    chain: ChainState,
    deposit: float,
    behavior: BehaviorProfile,
    min_deposit: float,
    initial_reputation: float,
) -> str:
    """Register an oracle node by locking its deposit; returns the new id."""
    if deposit < min_deposit:
        raise RegistrationError(
            f"deposit {deposit} below required minimum {min_deposit}"
        )
    node_id = f"node-{len(chain.nodes):04d}"
    chain.nodes[node_id] = OracleNode(
        id=node_id,
        deposit=float(deposit),
        reputation=initial_reputation,
        accumulated_reputation=initial_reputation,
        behavior=behavior,
    )
    chain.initial_deposit_total += deposit
    return node_id


def node_respond(
    node: OracleNode, view: TaskView, truth: GroundTruth, rng: random.Random,
    honest_noise_ratio: float,
) -> DataReport:
    """Produce a node's data report for a task view.

    The view carries no covertness information, so honest and malicious logic
    alike cannot distinguish test tasks from regular ones.
    """
    if node.status is NodeStatus.BLACKLISTED:
        raise ContractViolationError(f"blacklisted node {node.id} cannot respond")
    profile: BehaviorProfile = node.behavior
    true_value = truth.value_of(view.source)
    tol = truth.tolerance_of(view.source)

    falsify = (
        profile.kind is BehaviorKind.MALICIOUS
        and rng.random() < profile.misbehavior_probability
    )
    if falsify:
        offset = rng.uniform(profile.falsify_low * tol, profile.falsify_high * tol)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        value = true_value + sign * offset
    else:
        bound = honest_noise_ratio * tol
        value = true_value + rng.uniform(-bound, bound)
    response_time = rng.lognormvariate(profile.rt_mu, profile.rt_sigma)
    return DataReport(
        task_id=view.task_id,
        node_id=node.id,
        value=value,
        response_time=response_time,
        round_index=view.release_slot,
    )


@dataclass(frozen=True)
class SettlementRecord:
    round_index: int
    rewards_paid: float
    deposits_deducted: float
    strikes: int
    blacklisted: tuple[str, ...]
    deposits_total: float
    conserved: bool


@dataclass
class RoundRecord:
    """Everything observed in one round, input to metrics and the trace."""

    round_index: int
    reports: list[DataReport] = field(default_factory=list)
    deviations: list[float] = field(default_factory=list)
    falsified: dict[str, set[str]] = field(default_factory=dict)  # node -> task ids
    tested_nodes: set[str] = field(default_factory=set)
    verdicts: list[Verdict] = field(default_factory=list)


@dataclass
class SimulationResult:
    config: RunConfig
    run_id: str
    alpha: float
    rounds: list[RoundMetrics]
    final_nodes: list[dict]
    trace: list[dict]
    settlements: list[SettlementRecord]


class Simulation:
    """Strictly sequential round pipeline over a simulated oracle network."""

    def __init__(self, cfg: RunConfig):
        bad = validate_config(cfg)
        if bad:
            raise ConfigError(bad)
        self.cfg = cfg
        self.params = cfg.reputation
        seed = cfg.seed
        self.behavior_rng = random.Random(derive_label_seed(seed, "behavior"))
        self.schedule_rng = random.Random(derive_label_seed(seed, "schedule"))
        self.selection_rng = random.Random(derive_label_seed(seed, "selection"))
        self.truth_rng = random.Random(derive_label_seed(seed, "truth"))
        self.alpha = random.Random(derive_label_seed(seed, "alpha")).uniform(*cfg.alpha_band)

        self.truth = GroundTruth.build(cfg)
        self.chain = ChainState(
            ledger=InfractionLedger(theta_prov=cfg.theta_prov, theta_black=cfg.theta_black)
        )
        self.secret_keys: dict[str, bytes] = {}
        self.trace: list[dict] = []
        self.settlements: list[SettlementRecord] = []
        self.task_counter = 0
        self._current_round = 0
        self.pending_promotion: str | None = None
        self.repo = TestCaseRepository()

        self._trace_header()
        self._register_population()
        self.table = WeightTable.from_reputations(
            {n.id: n.reputation for n in self.chain.nodes.values()},
            weight_floor=cfg.weight_floor,
        )
        self.committee: CommitteeState | None = None
        if cfg.strategy == "dectest":
            self.committee = select_committee(
                self._committee_candidates(),
                cfg.committee_size,
                derive_round_seed(cfg.seed, 0),
                epoch=0,
                cyc=cfg.cyc,
            )
            self._trace_rotation(0, self.committee, reward=None)

    # -- setup -------------------------------------------------------------

    def _register_population(self) -> None:
        cfg = self.cfg
        n_malicious = round(cfg.population * cfg.malicious_fraction)
        for i in range(cfg.population):
            if i < n_malicious:
                profile = BehaviorProfile(
                    kind=BehaviorKind.MALICIOUS,
                    misbehavior_probability=cfg.misbehavior_probability,
                    falsify_low=cfg.falsification_range[0],
                    falsify_high=cfg.falsification_range[1],
                    rt_mu=cfg.malicious_rt_mu,
                    rt_sigma=cfg.malicious_rt_sigma,
                )
            else:
                profile = BehaviorProfile(
                    kind=BehaviorKind.HONEST,
                    misbehavior_probability=0.0,
                    falsify_low=cfg.falsification_range[0],
                    falsify_high=cfg.falsification_range[1],
                    rt_mu=cfg.honest_rt_mu,
                    rt_sigma=cfg.honest_rt_sigma,
                )
            node_id = register_node(
                self.chain,
                cfg.registration_deposit,
                profile,
                cfg.min_deposit,
                self.params.initial_reputation,
            )
            self.secret_keys[node_id] = node_secret_key(cfg.seed, node_id)
            self.trace.append(
                {
                    "event": "register",
                    "node": node_id,
                    "kind": profile.kind.value,
                    "deposit": cfg.registration_deposit,
                }
            )

    def _trace_header(self) -> None:
        cfg = self.cfg
        self.trace.append(
            {
                "event": "header",
                "schema_version": TRACE_SCHEMA_VERSION,
                "run_id": cfg.run_id(),
                "strategy": cfg.strategy,
                "alpha_band": self._alpha_label(),
                "seed": cfg.seed,
                "entropy_bins": cfg.entropy_bins,
                "entropy_range_bound": cfg.entropy_range_tolerances * cfg.base_tolerance,
                "tolerance": cfg.base_tolerance,
                "honest_noise_ratio": cfg.honest_noise_ratio,
                "population": cfg.population,
            }
        )

    def _alpha_label(self) -> str:
        return self.cfg.alpha_band_label if self.cfg.strategy == "dectest" else "none"

    def _committee_candidates(self) -> dict[str, bytes]:
        return {n.id: self.secret_keys[n.id] for n in self.chain.selectable_nodes()}

    def _trace_rotation(self, round_index: int, state: CommitteeState, reward) -> None:
        self.trace.append(
            {
                "event": "rotation",
                "round": round_index,
                "epoch": state.epoch,
                "questioner": state.questioner,
                "judge": state.judge,
                "validators": list(state.validators),
                "reward": reward,
            }
        )

    # -- round pipeline ----------------------------------------------------

    def run_round(self, round_index: int) -> RoundMetrics:
        cfg = self.cfg
        self._current_round = round_index
        self.trace.append({"event": "round", "round": round_index})
        self.truth.advance(self.truth_rng)
        record = RoundRecord(round_index=round_index)

        if cfg.strategy == "dectest":
            self._maybe_rotate(round_index)
            metrics = self._dectest_round(round_index, record)
        else:
            metrics = self._baseline_round(round_index, record)
        self.chain.round_counter = round_index + 1
        return metrics

    def _maybe_rotate(self, round_index: int) -> None:
        state = self.committee
        if round_index == 0 or round_index % state.cyc != 0:
            return
        reps = {n.id: n.reputation for n in self.chain.nodes.values()}
        result = rotate_committee(
            state,
            round_index,
            self._committee_candidates(),
            derive_round_seed(self.cfg.seed, round_index),
            reps,
            self.params,
            self.cfg.committee_size,
            forced_questioner=self.pending_promotion,
        )
        if result.reward_shares:
            for member, share in result.reward_shares.items():
                node = self.chain.nodes[member]
                if node.status is NodeStatus.BLACKLISTED:
                    continue
                node.reputation = apply_reputation_cap(
                    node.reputation + share, self.params
                )
        # cycle boundary: advance accumulated reputation, reset test windows
        for node in self.chain.nodes.values():
            if node.status is NodeStatus.BLACKLISTED:
                continue
            node.accumulated_reputation = node.reputation
            node.tests_assigned = []
            node.tests_passed = []
        self.pending_promotion = None
        self.committee = result.state
        self._trace_rotation(round_index, result.state, result.reward)

    def _make_regular_tasks(self, round_index: int, count: int) -> list[TaskRequest]:
        tasks = []
        for _ in range(count):
            source = self.schedule_rng.choice(self.truth.sources)
            tasks.append(
                TaskRequest(
                    task_id=f"task-{self.task_counter:08d}",
                    source=source,
                    covert=False,
                    release_slot=round_index,
                )
            )
            self.task_counter += 1
        return tasks

    def _provision_cases(self, count: int) -> None:
        # covert queries are drawn from the same source mix as regular tasks
        for _ in range(count):
            source = self.schedule_rng.choice(self.truth.sources)
            self.repo.provision(
                source, self.truth.value_of(source), self.truth.tolerance_of(source)
            )

    def _respond(
        self, node: OracleNode, task: TaskRequest, record: RoundRecord
    ) -> DataReport:
        view = task.view()
        report = node_respond(
            node, view, self.truth, self.behavior_rng, self.cfg.honest_noise_ratio
        )
        truth_value = self.truth.value_of(task.source)
        tol = self.truth.tolerance_of(task.source)
        deviation = abs(report.value - truth_value)
        if deviation > self.cfg.honest_noise_ratio * tol:
            record.falsified.setdefault(node.id, set()).add(task.task_id)
        record.reports.append(report)
        record.deviations.append(deviation)
        node.record_response_time(report.response_time)
        node.sources_served.add(task.source)
        self.chain.response_count += 1
        self.trace.append(
            {
                "event": "report",
                "round": record.round_index,
                "task": task.task_id,
                "node": node.id,
                "value": report.value,
                "truth": truth_value,
                "tolerance": tol,
                "response_time": report.response_time,
            }
        )
        return report

    def _dispatch(self, task: TaskRequest, node_id: str, record: RoundRecord) -> None:
        self.chain.dispatched.add(task.task_id)
        self.trace.append(
            {
                "event": "dispatch",
                "round": record.round_index,
                "task": task.task_id,
                "node": node_id,
                "source": task.source,
                "covert": task.covert,
            }
        )

    def _weighted_pick(self, ids: list[str], weights: list[float]) -> str:
        total = sum(weights)
        r = self.selection_rng.random() * total
        acc = 0.0
        for node_id, w in zip(ids, weights):
            acc += w
            if r < acc:
                return node_id
        return ids[-1]

    def _dectest_round(self, round_index: int, record: RoundRecord) -> RoundMetrics:
        cfg = self.cfg
        state = self.committee
        tests_n = min(cfg.effective_tests_per_round, cfg.feeders_per_round)

        self._provision_cases(tests_n)
        covert_tasks = draft_test_tasks(
            self.repo, tests_n, round_index, state, self.task_counter
        )
        self.task_counter += tests_n
        regular_tasks = self._make_regular_tasks(round_index, cfg.regular_tasks_per_round)
        schedule = schedule_release(covert_tasks, regular_tasks, self.schedule_rng)

        # a malicious questioner may tamper with the expected answers it plants
        canonical = {t.task_id: self.repo.lookup(t.case_id).expected_value for t in covert_tasks}
        planted = dict(canonical)
        questioner_node = self.chain.nodes[state.questioner]
        corrupted = False
        if (
            covert_tasks
            and questioner_node.behavior.kind is BehaviorKind.MALICIOUS
            and self.behavior_rng.random() < questioner_node.behavior.misbehavior_probability
        ):
            corrupted = True
            for t in covert_tasks:
                case = self.repo.lookup(t.case_id)
                planted[t.task_id] = case.expected_value + 3.0 * case.tolerance

        # feeder selection: committee members never feed in their own round
        eligible = {
            node_id: w
            for node_id, w in self.table.snapshot().items()
            if node_id not in state.members
        }
        feeders = select_feeders(
            WeightTable(eligible, weight_floor=cfg.weight_floor),
            cfg.feeders_per_round,
            self.selection_rng,
        )
        feeder_weights = [self.table.weight_of(f) for f in feeders]

        covert_order = [t for t in schedule if t.covert]
        covert_assignee = {
            t.task_id: feeders[i] for i, t in enumerate(covert_order)
        }
        record.tested_nodes = set(covert_assignee.values())

        assigned_counts: dict[str, int] = {}
        passed_counts: dict[str, int] = {}
        reports_by_task: dict[str, DataReport] = {}
        for task in schedule:
            if task.covert:
                node_id = covert_assignee[task.task_id]
                assigned_counts[node_id] = assigned_counts.get(node_id, 0) + 1
            else:
                node_id = self._weighted_pick(feeders, feeder_weights)
            self._dispatch(task, node_id, record)
            report = self._respond(self.chain.nodes[node_id], task, record)
            reports_by_task[task.task_id] = report

        # validators compare covert feeds against the (possibly planted) cases
        verdicts = []
        for i, task in enumerate(sorted(covert_tasks, key=lambda t: t.task_id)):
            case = self.repo.lookup(task.case_id)
            check_case = dataclasses.replace(case, expected_value=planted[task.task_id])
            report = reports_by_task[task.task_id]
            verdicts.append(
                verify_feed(task.task_id, report.node_id, report.value, check_case)
            )
            validators = state.validators
            state.add_contribution(validators[i % len(validators)], 1.0)

        verdicts = self._handle_accusations(
            round_index, state, corrupted, covert_tasks, planted, canonical,
            reports_by_task, verdicts, feeders,
        )
        verdicts.sort(key=lambda v: (v.task_id, v.node_id))
        record.verdicts = verdicts
        for v in verdicts:
            self.trace.append(
                {
                    "event": "verdict",
                    "round": round_index,
                    "task": v.task_id,
                    "node": v.node_id,
                    "outcome": v.outcome,
                }
            )
            if v.outcome == "passed":
                passed_counts[v.node_id] = passed_counts.get(v.node_id, 0) + 1

        self._settle(round_index, verdicts, assigned_counts, passed_counts)
        return self._capture_metrics(record)

    def _handle_accusations(
        self,
        round_index: int,
        state: CommitteeState,
        corrupted: bool,
        covert_tasks: list[TaskRequest],
        planted: dict[str, float],
        canonical: dict[str, float],
        reports_by_task: dict[str, DataReport],
        verdicts: list[Verdict],
        feeders: list[str],
    ) -> list[Verdict]:
        cfg = self.cfg
        accusation = None
        if corrupted:
            honest_validators = [
                v
                for v in state.validators
                if self.chain.nodes[v].behavior.kind is BehaviorKind.HONEST
            ]
            if honest_validators:
                accusation = Accusation(
                    accuser=honest_validators[0],
                    accused=state.questioner,
                    evidence=tuple(sorted(t.task_id for t in covert_tasks)),
                )
        else:
            for v in state.validators:
                node = self.chain.nodes[v]
                if (
                    node.behavior.kind is BehaviorKind.MALICIOUS
                    and self.behavior_rng.random() < cfg.false_accusation_probability
                ):
                    accusation = Accusation(
                        accuser=v,
                        accused=state.questioner,
                        evidence=tuple(sorted(t.task_id for t in covert_tasks)),
                    )
                    break
        if accusation is None:
            return verdicts

        ruling = adjudicate_accusation(accusation, state, planted, canonical)
        self.trace.append(
            {
                "event": "accusation",
                "round": round_index,
                "accuser": accusation.accuser,
                "accused": accusation.accused,
                "upheld": ruling.upheld,
            }
        )
        if ruling.upheld:
            # re-verify the tampered tasks against the repository's values
            verdicts = []
            for task in sorted(covert_tasks, key=lambda t: t.task_id):
                case = self.repo.lookup(task.case_id)
                report = reports_by_task[task.task_id]
                verdicts.append(
                    verify_feed(task.task_id, report.node_id, report.value, case)
                )
            offender = self.chain.nodes[ruling.removed]
            strike = record_strike(self.chain.ledger, offender)
            self._apply_status_effects(strike)
            offender.reputation = punish(offender.reputation, offender.strikes, self.params)
            state.add_contribution(accusation.accuser, 1.0)
            self.pending_promotion = accusation.accuser
            # the accuser acts as questioner for the rest of the cycle; a fresh
            # member replaces the vacated validator seat to keep size
            remaining = tuple(v for v in state.validators if v != accusation.accuser)
            excluded = set(state.members) | set(feeders)
            replacement = self._elect_replacement(round_index, excluded)
            if replacement is not None:
                remaining = remaining + (replacement,)
            self.committee = CommitteeState(
                questioner=accusation.accuser,
                judge=state.judge,
                validators=remaining,
                epoch=state.epoch,
                cyc=state.cyc,
                contributions=state.contributions,
                tasks_issued=state.tasks_issued,
            )
        elif ruling.penalized is not None:
            accuser_node = self.chain.nodes[ruling.penalized]
            accuser_node.reputation = punish(
                accuser_node.reputation, accuser_node.strikes + 1, self.params
            )
        return verdicts

    def _elect_replacement(self, round_index: int, excluded: set[str]) -> str | None:
        """Lowest-VRF selectable node outside ``excluded``, or None if empty."""
        seed = derive_round_seed(self.cfg.seed, round_index) + b"replacement"
        best: tuple[int, str] | None = None
        for node in self.chain.selectable_nodes():
            if node.id in excluded:
                continue
            value = vrf_evaluate(self.secret_keys[node.id], seed).value
            if best is None or (value, node.id) < best:
                best = (value, node.id)
        return best[1] if best else None

    def _apply_status_effects(self, report) -> None:
        # provisional status is a watch-list entry only; the outcome-driven
        # weight adjustment is the sole selection penalty short of blacklisting
        if report.new_status is report.old_status:
            return
        if report.new_status is NodeStatus.BLACKLISTED:
            self.table.remove(report.node_id)
            self.chain.slashed_total += report.deposit_slashed
            self.trace.append(
                {
                    "event": "blacklist",
                    "round": self._current_round,
                    "node": report.node_id,
                    "deposit_slashed": report.deposit_slashed,
                }
            )

    def _settle(
        self,
        round_index: int,
        verdicts: list[Verdict],
        assigned_counts: dict[str, int],
        passed_counts: dict[str, int],
    ) -> SettlementRecord:
        cfg = self.cfg
        for v in verdicts:
            if v.task_id not in self.chain.dispatched:
                raise ContractViolationError(
                    f"verdict for unknown task {v.task_id}"
                )

        # per-node test window entries for this round
        for node in self.chain.nodes.values():
            if node.status is NodeStatus.BLACKLISTED:
                continue
            node.tests_assigned.append(assigned_counts.get(node.id, 0))
            node.tests_passed.append(passed_counts.get(node.id, 0))

        rewards_paid = 0.0
        deducted = 0.0
        strikes = 0
        blacklisted: list[str] = []
        failed_nodes: set[str] = set()
        for v in verdicts:
            node = self.chain.nodes[v.node_id]
            if v.outcome == "passed":
                node.deposit += cfg.reward_per_pass
                self.chain.rewards_minted += cfg.reward_per_pass
                rewards_paid += cfg.reward_per_pass
                if node.id in self.table:
                    adjust_weight_on_outcome(self.table, node.id, "passed", self.alpha)
            else:
                failed_nodes.add(v.node_id)
                if node.status is NodeStatus.BLACKLISTED:
                    continue
                cut = cfg.deposit_deduction_fraction * node.deposit
                node.deposit -= cut
                self.chain.slashed_total += cut
                deducted += cut
                strike = record_strike(self.chain.ledger, node)
                strikes += 1
                self._apply_status_effects(strike)
                if strike.new_status is NodeStatus.BLACKLISTED:
                    blacklisted.append(node.id)
                    deducted += strike.deposit_slashed
                elif node.id in self.table:
                    adjust_weight_on_outcome(self.table, node.id, "failed", self.alpha)

        self._recompute_reputations()
        for node_id in failed_nodes:
            node = self.chain.nodes[node_id]
            if node.status is NodeStatus.BLACKLISTED:
                continue
            node.reputation = punish(node.reputation, node.strikes, self.params)

        deposits_total = self.chain.deposits_total()
        expected = self.chain.initial_deposit_total + self.chain.rewards_minted
        actual = deposits_total + self.chain.slashed_total
        conserved = abs(actual - expected) <= 1e-9 * max(1.0, abs(expected))
        settlement = SettlementRecord(
            round_index=round_index,
            rewards_paid=rewards_paid,
            deposits_deducted=deducted,
            strikes=strikes,
            blacklisted=tuple(blacklisted),
            deposits_total=deposits_total,
            conserved=conserved,
        )
        self.settlements.append(settlement)
        self.trace.append(
            {
                "event": "settlement",
                "round": round_index,
                "rewards_paid": rewards_paid,
                "deposits_deducted": deducted,
                "strikes": strikes,
                "blacklisted": list(blacklisted),
                "deposits_total": deposits_total,
                "conserved": conserved,
            }
        )
        if not conserved:
            raise ContractViolationError(
                f"conservation identity violated in round {round_index}"
            )
        return settlement

    def _recompute_reputations(self) -> None:
        nodes = self.chain.selectable_nodes()
        if not nodes:
            return
        acc_reps = [n.accumulated_reputation for n in nodes]
        total = sum(acc_reps)
        population = len(nodes)
        for i, node in enumerate(nodes):
            ac = accuracy_score(sum(node.tests_passed), node.tests_assigned)
            rw = reputation_weight(acc_reps, i, self.params.diversity_factor, total=total)
            rt = response_time_score_from_sums(
                len(node.response_times), node.rt_sum, node.rt_sq_sum, population
            )
            raw = update_reputation(ac, rw, rt, self.params, node.accumulated_reputation)
            node.reputation = apply_reputation_cap(raw, self.params)

    def _baseline_round(self, round_index: int, record: RoundRecord) -> RoundMetrics:
        cfg = self.cfg
        regular_tasks = self._make_regular_tasks(round_index, cfg.regular_tasks_per_round)

        if cfg.strategy == "dos_like":
            quorum_size = min(cfg.effective_dos_quorum, len(self.table))
            pool = sorted(self.table.node_ids())
            quorum = self.selection_rng.sample(pool, quorum_size)
            for task in regular_tasks:
                values = []
                for node_id in quorum:
                    self._dispatch(task, node_id, record)
                    report = self._respond(self.chain.nodes[node_id], task, record)
                    values.append(report.value)
                values.sort()
                aggregate = values[len(values) // 2]
                self.trace.append(
                    {
                        "event": "aggregate",
                        "round": round_index,
                        "task": task.task_id,
                        "value": aggregate,
                    }
                )
        else:
            if cfg.strategy == "pure_random":
                pool = sorted(self.table.node_ids())
                feeders = self.selection_rng.sample(pool, cfg.feeders_per_round)
                feeder_weights = [1.0] * len(feeders)
            else:  # weighted_random: static weights, no outcome feedback
                feeders = select_feeders(
                    WeightTable(self.table.snapshot(), weight_floor=cfg.weight_floor),
                    cfg.feeders_per_round,
                    self.selection_rng,
                )
                feeder_weights = [self.table.weight_of(f) for f in feeders]
            for task in regular_tasks:
                node_id = self._weighted_pick(feeders, feeder_weights)
                self._dispatch(task, node_id, record)
                self._respond(self.chain.nodes[node_id], task, record)

        return self._capture_metrics(record)

    def _capture_metrics(self, record: RoundRecord) -> RoundMetrics:
        cfg = self.cfg
        entropy = deviation_entropy(
            record.deviations,
            cfg.entropy_bins,
            cfg.entropy_range_tolerances * cfg.base_tolerance,
        )
        falsifying_tested = {
            node_id for node_id in record.falsified if node_id in record.tested_nodes
        }
        failed = {v.node_id for v in record.verdicts if v.outcome == "failed"}
        detection = detection_success_rate(failed, falsifying_tested)
        accuracy = feed_accuracy(record.deviations, cfg.base_tolerance)
        malicious_surviving = sum(
            1
            for n in self.chain.nodes.values()
            if n.behavior.kind is BehaviorKind.MALICIOUS
            and n.status is not NodeStatus.BLACKLISTED
        )
        malicious_detected = sum(
            1
            for node_id in failed
            if self.chain.nodes[node_id].behavior.kind is BehaviorKind.MALICIOUS
        )
        return RoundMetrics(
            round_index=record.round_index,
            entropy=entropy,
            detection_success_rate=detection,
            feed_accuracy=accuracy,
            true_malicious_active=malicious_surviving,
            malicious_detected=malicious_detected,
            strategy=cfg.strategy,
            alpha_band=self._alpha_label(),
        )

    # -- full runs and snapshots --------------------------------------------

    def run(self) -> SimulationResult:
        metrics = [self.run_round(r) for r in range(self.cfg.rounds)]
        final_nodes = [
            {
                "id": n.id,
                "kind": n.behavior.kind.value,
                "status": n.status.value,
                "deposit": n.deposit,
                "reputation": n.reputation,
                "strikes": n.strikes,
                "weight": self.table.weight_of(n.id) if n.id in self.table else None,
            }
            for n in self.chain.nodes.values()
        ]
        return SimulationResult(
            config=self.cfg,
            run_id=self.cfg.run_id(),
            alpha=self.alpha,
            rounds=metrics,
            final_nodes=final_nodes,
            trace=self.trace,
            settlements=self.settlements,
        )

    def snapshot(self) -> dict:
        """Full mutable state as a JSON-serializable dict (trace excluded)."""
        return {
            "schema_version": TRACE_SCHEMA_VERSION,
            "config": config_to_dict(self.cfg),
            "alpha": self.alpha,
            "task_counter": self.task_counter,
            "round_counter": self.chain.round_counter,
            "pending_promotion": self.pending_promotion,
            "rng": {
                name: _state_to_json(getattr(self, name).getstate())
                for name in ("behavior_rng", "schedule_rng", "selection_rng", "truth_rng")
            },
            "truth_values": dict(self.truth.values),
            "weights": self.table.snapshot(),
            "ledger": {
                "strikes": dict(self.chain.ledger.strikes),
                "provisional": sorted(self.chain.ledger.provisional),
                "blacklist": sorted(self.chain.ledger.blacklist),
            },
            "chain": {
                "initial_deposit_total": self.chain.initial_deposit_total,
                "rewards_minted": self.chain.rewards_minted,
                "slashed_total": self.chain.slashed_total,
                "response_count": self.chain.response_count,
                "dispatched": sorted(self.chain.dispatched),
            },
            "nodes": [
                {
                    "id": n.id,
                    "deposit": n.deposit,
                    "reputation": n.reputation,
                    "accumulated_reputation": n.accumulated_reputation,
                    "response_times": list(n.response_times),
                    "tests_assigned": list(n.tests_assigned),
                    "tests_passed": list(n.tests_passed),
                    "strikes": n.strikes,
                    "status": n.status.value,
                    "sources_served": sorted(n.sources_served),
                }
                for n in self.chain.nodes.values()
            ],
            "committee": None
            if self.committee is None
            else {
                "questioner": self.committee.questioner,
                "judge": self.committee.judge,
                "validators": list(self.committee.validators),
                "epoch": self.committee.epoch,
                "cyc": self.committee.cyc,
                "contributions": dict(self.committee.contributions),
                "tasks_issued": self.committee.tasks_issued,
            },
            "repo": {
                "counter": self.repo._counter,
                "used": sorted(self.repo.used),
                "cases": [
                    {
                        "case_id": c.case_id,
                        "source": c.source,
                        "expected_value": c.expected_value,
                        "tolerance": c.tolerance,
                    }
                    for c in self.repo.cases.values()
                ],
            },
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "Simulation":
        from .domain import TestCase

        sim = cls(config_from_dict(snap["config"]))
        sim.alpha = snap["alpha"]
        sim.task_counter = snap["task_counter"]
        sim.chain.round_counter = snap["round_counter"]
        sim.pending_promotion = snap["pending_promotion"]
        for name, state in snap["rng"].items():
            getattr(sim, name).setstate(_state_from_json(state))
        sim.truth.values = dict(snap["truth_values"])
        sim.table = WeightTable(dict(snap["weights"]), weight_floor=sim.cfg.weight_floor)
        sim.chain.ledger.strikes = dict(snap["ledger"]["strikes"])
        sim.chain.ledger.provisional = set(snap["ledger"]["provisional"])
        sim.chain.ledger.blacklist = set(snap["ledger"]["blacklist"])
        sim.chain.initial_deposit_total = snap["chain"]["initial_deposit_total"]
        sim.chain.rewards_minted = snap["chain"]["rewards_minted"]
        sim.chain.slashed_total = snap["chain"]["slashed_total"]
        sim.chain.response_count = snap["chain"]["response_count"]
        sim.chain.dispatched = set(snap["chain"]["dispatched"])
        for rec in snap["nodes"]:
            node = sim.chain.nodes[rec["id"]]
            node.deposit = rec["deposit"]
            node.reputation = rec["reputation"]
            node.accumulated_reputation = rec["accumulated_reputation"]
            node.response_times = list(rec["response_times"])
            node.rt_sum = sum(node.response_times)
            node.rt_sq_sum = sum(t * t for t in node.response_times)
            node.tests_assigned = list(rec["tests_assigned"])
            node.tests_passed = list(rec["tests_passed"])
            node.strikes = rec["strikes"]
            node.status = NodeStatus(rec["status"])
            node.sources_served = set(rec["sources_served"])
        if snap["committee"] is not None:
            c = snap["committee"]
            sim.committee = CommitteeState(
                questioner=c["questioner"],
                judge=c["judge"],
                validators=tuple(c["validators"]),
                epoch=c["epoch"],
                cyc=c["cyc"],
                contributions=dict(c["contributions"]),
                tasks_issued=c["tasks_issued"],
            )
        else:
            sim.committee = None
        sim.repo = TestCaseRepository()
        sim.repo._counter = snap["repo"]["counter"]
        sim.repo.used = set(snap["repo"]["used"])
        for rec in snap["repo"]["cases"]:
            sim.repo.cases[rec["case_id"]] = TestCase(**rec)
        return sim


def _state_to_json(state) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _state_from_json(data) -> tuple:
    version, internal, gauss = data
    return (version, tuple(internal), gauss)


def run_simulation(cfg: RunConfig) -> SimulationResult:
    """Run one full simulation for the given configuration."""
    return Simulation(cfg).run()
