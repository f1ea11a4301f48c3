"""Deterministic simulator of a covert-testing blockchain oracle network."""

from .chainsim import (
    BehaviorProfile,
    ChainState,
    DataReport,
    GroundTruth,
    Simulation,
    SimulationResult,
    node_respond,
    register_node,
    run_simulation,
)
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
from .config import RunConfig, config_from_dict, config_to_dict, parse_config
from .coverage import (
    CoveragePlan,
    cycles_for_coverage,
    empirical_coverage,
    plan_coverage,
    rounds_for_coverage,
)
from .domain import (
    BehaviorKind,
    CommitteeState,
    InfractionLedger,
    NodeStatus,
    OracleNode,
    TaskRequest,
    TaskView,
    TestCase,
    record_strike,
)
from .experiment import SweepGrid, replay_trace, run_experiment, run_sweep
from .metrics import (
    MetricsRow,
    RoundMetrics,
    deviation_entropy,
    detection_success_rate,
    export_metrics,
    feed_accuracy,
)
from .reputation import (
    ReputationParams,
    accuracy_score,
    apply_reputation_cap,
    committee_reward,
    punish,
    reputation_weight,
    response_time_score,
    sigmoid,
    update_reputation,
)
from .selection import (
    VrfOutput,
    WeightTable,
    adjust_weight_on_outcome,
    select_committee,
    select_feeders,
    vrf_evaluate,
    vrf_public_key,
    vrf_verify,
)

__version__ = "0.1.0"
