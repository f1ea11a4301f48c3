import pytest

from oraclesim.domain import (
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
from oraclesim.errors import ContractViolationError


def make_node(deposit=100.0, strikes=0, status=NodeStatus.ACTIVE):
    node = OracleNode(
        id="node-0000",
        deposit=deposit,
        reputation=100.0,
        accumulated_reputation=100.0,
        strikes=strikes,
        status=status,
    )
    return node


def expected_status(strikes, theta_prov, theta_black):
    # independent statement of the transition rule
    if strikes > theta_black:
        return NodeStatus.BLACKLISTED
    if strikes > theta_prov:
        return NodeStatus.PROVISIONAL
    return NodeStatus.ACTIVE


def test_strike_below_both_thresholds_keeps_active():
    ledger = InfractionLedger(theta_prov=2, theta_black=5)
    node = make_node()
    report = record_strike(ledger, node)
    assert node.strikes == 1
    assert report.old_status is NodeStatus.ACTIVE
    assert report.new_status is NodeStatus.ACTIVE
    assert report.deposit_slashed == 0.0


def test_crossing_provisional_threshold():
    ledger = InfractionLedger(theta_prov=2, theta_black=5)
    node = make_node(strikes=2)
    report = record_strike(ledger, node)
    assert node.strikes == 3
    assert report.old_status is NodeStatus.ACTIVE
    assert report.new_status is NodeStatus.PROVISIONAL
    assert node.id in ledger.provisional


def test_crossing_blacklist_threshold_slashes_deposit():
    ledger = InfractionLedger(theta_prov=2, theta_black=5)
    node = make_node(deposit=100.0, strikes=5, status=NodeStatus.PROVISIONAL)
    ledger.provisional.add(node.id)
    report = record_strike(ledger, node)
    assert node.strikes == 6
    assert report.new_status is NodeStatus.BLACKLISTED
    assert report.deposit_slashed == 100.0
    assert node.deposit == 0.0
    assert node.id in ledger.blacklist
    assert node.id not in ledger.provisional


def test_strike_on_blacklisted_node_rejected():
    ledger = InfractionLedger(theta_prov=0, theta_black=1)
    node = make_node(status=NodeStatus.BLACKLISTED)
    with pytest.raises(ContractViolationError):
        record_strike(ledger, node)


def test_transition_rule_exhaustive():
    # every (theta_prov, theta_black, strike-count) combination up to 10
    for theta_prov in range(0, 9):
        for theta_black in range(theta_prov + 1, 10):
            ledger = InfractionLedger(theta_prov=theta_prov, theta_black=theta_black)
            node = make_node()
            for _ in range(10):
                if node.status is NodeStatus.BLACKLISTED:
                    break
                record_strike(ledger, node)
                assert node.status is expected_status(
                    node.strikes, theta_prov, theta_black
                )


def test_transitions_are_monotone():
    order = {NodeStatus.ACTIVE: 0, NodeStatus.PROVISIONAL: 1, NodeStatus.BLACKLISTED: 2}
    ledger = InfractionLedger(theta_prov=1, theta_black=3)
    node = make_node()
    seen = [node.status]
    while node.status is not NodeStatus.BLACKLISTED:
        record_strike(ledger, node)
        seen.append(node.status)
    assert all(order[a] <= order[b] for a, b in zip(seen, seen[1:]))


def test_strikes_never_decrease_and_registry_disjoint():
    ledger = InfractionLedger(theta_prov=0, theta_black=2)
    nodes = [make_node() for _ in range(4)]
    for i, node in enumerate(nodes):
        node.id = f"node-{i:04d}"
    last = {n.id: 0 for n in nodes}
    for round_ in range(3):
        for node in nodes:
            if node.status is NodeStatus.BLACKLISTED:
                continue
            record_strike(ledger, node)
            assert node.strikes > last[node.id]
            last[node.id] = node.strikes
    assert not (ledger.provisional & ledger.blacklist)


def test_slashed_deposits_equal_blacklisted_totals():
    ledger = InfractionLedger(theta_prov=0, theta_black=1)
    total_slashed = 0.0
    deposits = [100.0, 250.0, 60.0]
    for i, deposit in enumerate(deposits):
        node = make_node(deposit=deposit)
        node.id = f"node-{i:04d}"
        while node.status is not NodeStatus.BLACKLISTED:
            report = record_strike(ledger, node)
            total_slashed += report.deposit_slashed
        assert node.deposit == 0.0
    assert total_slashed == pytest.approx(sum(deposits))


def test_ledger_rejects_bad_thresholds():
    with pytest.raises(ValueError):
        InfractionLedger(theta_prov=3, theta_black=3)
    with pytest.raises(ValueError):
        InfractionLedger(theta_prov=-1, theta_black=1)


def test_task_view_has_no_covert_field():
    task = TaskRequest(task_id="t", source="src-000", covert=True, release_slot=0)
    view = task.view()
    assert isinstance(view, TaskView)
    assert not hasattr(view, "covert")
    assert view.task_id == "t"


def test_test_case_rejects_negative_tolerance():
    with pytest.raises(ValueError):
        TestCase(case_id="c", source="s", expected_value=1.0, tolerance=-0.1)


def test_committee_state_invariants():
    state = CommitteeState(
        questioner="a", judge="b", validators=("c", "d"), epoch=0, cyc=5
    )
    assert state.members == ("a", "b", "c", "d")
    with pytest.raises(ValueError):
        CommitteeState(questioner="a", judge="a", validators=("c",), epoch=0, cyc=5)
    with pytest.raises(ValueError):
        CommitteeState(questioner="a", judge="b", validators=(), epoch=0, cyc=5)
