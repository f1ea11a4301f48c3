import random

import pytest
from scipy import stats

from oraclesim.domain import CommitteeState
from oraclesim.errors import DomainError, InsufficientPoolError
from oraclesim.selection import (
    VrfOutput,
    WeightTable,
    adjust_weight_on_outcome,
    derive_label_seed,
    derive_round_seed,
    select_committee,
    select_feeders,
    vrf_evaluate,
    vrf_public_key,
    vrf_verify,
)


# -- weight table -------------------------------------------------------------


def test_table_from_reputations_normalizes_to_mean_one():
    table = WeightTable.from_reputations({"a": 50.0, "b": 150.0})
    assert table.weight_of("a") == pytest.approx(0.5)
    assert table.weight_of("b") == pytest.approx(1.5)
    assert table.total_weight == pytest.approx(2.0)


def test_table_rejects_nonpositive_weights():
    with pytest.raises(DomainError):
        WeightTable({"a": 0.0})


def test_total_weight_tracks_mutations():
    table = WeightTable({"a": 1.0, "b": 2.0, "c": 3.0})
    table.remove("b")
    assert table.total_weight == pytest.approx(4.0, rel=1e-9)
    table.scale("a", 2.0)
    assert table.total_weight == pytest.approx(5.0, rel=1e-9)


# -- feeder selection -----------------------------------------------------------


def test_select_feeders_sizes_and_uniqueness():
    table = WeightTable({f"n{i}": 1.0 + i for i in range(20)})
    rng = random.Random(0)
    for n in (0, 1, 5, 20):
        chosen = select_feeders(table, n, rng)
        assert len(chosen) == n
        assert len(set(chosen)) == n


def test_select_feeders_pool_errors():
    table = WeightTable({"a": 1.0})
    with pytest.raises(InsufficientPoolError):
        select_feeders(table, 2, random.Random(0))


def test_equal_weights_give_symmetric_frequencies():
    table = WeightTable({"a": 1.0, "b": 1.0})
    rng = random.Random(123)
    hits = sum(select_feeders(table, 1, rng)[0] == "a" for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) < 0.02


def test_three_to_one_weights_give_three_to_one_draws():
    table = WeightTable({"a": 3.0, "b": 1.0})
    rng = random.Random(7)
    hits = sum(select_feeders(table, 1, rng)[0] == "a" for _ in range(10_000))
    assert abs(hits / 10_000 - 0.75) < 0.02


def test_first_draw_distribution_chi_square():
    weights = {"a": 1.0, "b": 2.0, "c": 3.0}
    table = WeightTable(weights)
    rng = random.Random(99)
    counts = {"a": 0, "b": 0, "c": 0}
    draws = 10_000
    for _ in range(draws):
        counts[select_feeders(table, 1, rng)[0]] += 1
    expected = [draws * w / 6.0 for w in (1.0, 2.0, 3.0)]
    observed = [counts["a"], counts["b"], counts["c"]]
    _, p_value = stats.chisquare(observed, expected)
    assert p_value > 0.01


def test_removed_node_never_selected():
    table = WeightTable({"a": 5.0, "b": 1.0, "c": 1.0})
    table.remove("a")
    rng = random.Random(1)
    for _ in range(500):
        assert "a" not in select_feeders(table, 2, rng)


def test_selection_deterministic_for_seed():
    table = WeightTable({f"n{i}": float(i + 1) for i in range(30)})
    a = select_feeders(table, 10, random.Random(42))
    b = select_feeders(table, 10, random.Random(42))
    assert a == b


# -- weight adjustment ------------------------------------------------------------


def test_adjust_passed_and_failed():
    table = WeightTable({"a": 10.0})
    adjust_weight_on_outcome(table, "a", "passed", 0.1)
    assert table.weight_of("a") == pytest.approx(11.0, rel=1e-9)
    adjust_weight_on_outcome(table, "a", "failed", 0.1)
    assert table.weight_of("a") == pytest.approx(9.9, rel=1e-9)


def test_adjust_alpha_zero_is_neutral():
    table = WeightTable({"a": 10.0})
    adjust_weight_on_outcome(table, "a", "passed", 0.0)
    adjust_weight_on_outcome(table, "a", "failed", 0.0)
    assert table.weight_of("a") == pytest.approx(10.0, rel=1e-12)


def test_adjust_floors_at_positive_minimum():
    table = WeightTable({"a": 1.0}, weight_floor=1e-6)
    for _ in range(200):
        adjust_weight_on_outcome(table, "a", "failed", 0.9)
    assert table.weight_of("a") == pytest.approx(1e-6)
    assert table.weight_of("a") > 0


def test_adjust_unknown_node_and_bad_outcome():
    table = WeightTable({"a": 1.0})
    with pytest.raises(KeyError):
        adjust_weight_on_outcome(table, "zzz", "passed", 0.1)
    with pytest.raises(DomainError):
        adjust_weight_on_outcome(table, "a", "maybe", 0.1)


# -- VRF ---------------------------------------------------------------------------


def test_vrf_deterministic():
    out1 = vrf_evaluate(b"secret", b"seed")
    out2 = vrf_evaluate(b"secret", b"seed")
    assert out1 == out2


def test_vrf_round_trip_verifies():
    pk = vrf_public_key(b"secret")
    out = vrf_evaluate(b"secret", b"round-1")
    assert vrf_verify(pk, b"round-1", out)


def test_vrf_wrong_seed_fails():
    pk = vrf_public_key(b"secret")
    out = vrf_evaluate(b"secret", b"round-1")
    assert not vrf_verify(pk, b"round-2", out)


def test_vrf_truncated_proof_fails():
    pk = vrf_public_key(b"secret")
    out = vrf_evaluate(b"secret", b"round-1")
    assert not vrf_verify(pk, b"round-1", VrfOutput(out.value, out.proof[:-1]))
    assert not vrf_verify(pk, b"round-1", VrfOutput(out.value ^ 1, out.proof))


def test_vrf_forging_without_secret_fails():
    pk = vrf_public_key(b"the-real-secret")
    forged = vrf_evaluate(b"attacker-secret", b"round-1")
    assert not vrf_verify(pk, b"round-1", forged)


def test_vrf_distinct_keys_distinct_values():
    rng = random.Random(5)
    seed = b"shared-seed"
    values = set()
    for _ in range(1000):
        key = rng.randbytes(16)
        values.add(vrf_evaluate(key, seed).value)
    assert len(values) == 1000


def test_vrf_avalanche_on_seed_bit_flip():
    rng = random.Random(6)
    distances = []
    for _ in range(1000):
        seed = bytearray(rng.randbytes(16))
        v1 = vrf_evaluate(b"key", bytes(seed)).value
        bit = rng.randrange(128)
        seed[bit // 8] ^= 1 << (bit % 8)
        v2 = vrf_evaluate(b"key", bytes(seed)).value
        distances.append(bin(v1 ^ v2).count("1"))
    mean = sum(distances) / len(distances)
    assert 120 <= mean <= 136
    assert all(70 <= d <= 186 for d in distances)


def test_vrf_rejects_empty_inputs():
    with pytest.raises(DomainError):
        vrf_evaluate(b"", b"seed")
    with pytest.raises(DomainError):
        vrf_evaluate(b"key", b"")


# -- committee election --------------------------------------------------------------


def candidates(n, prefix="node"):
    return {f"{prefix}-{i:03d}": bytes([i % 256]) * 8 + b"key" for i in range(n)}


def test_committee_full_pool_selects_everyone():
    cands = candidates(4)
    state = select_committee(cands, 4, b"round-seed", epoch=0, cyc=5)
    assert set(state.members) == set(cands)


def test_committee_deterministic_for_seed():
    cands = candidates(12)
    a = select_committee(cands, 5, b"seed-x", epoch=0, cyc=5)
    b = select_committee(cands, 5, b"seed-x", epoch=0, cyc=5)
    assert a.members == b.members


def test_committee_roles_follow_vrf_order():
    cands = candidates(10)
    seed = b"role-ordering"
    state = select_committee(cands, 5, seed, epoch=0, cyc=5)
    values = {nid: vrf_evaluate(sk, seed).value for nid, sk in cands.items()}
    ranked = sorted(state.members, key=lambda nid: values[nid])
    assert state.questioner == ranked[0]
    assert state.judge == ranked[1]
    assert tuple(ranked[2:]) == state.validators


def test_committee_selection_frequencies_binomial():
    cands = candidates(20)
    size = 5
    counts = {nid: 0 for nid in cands}
    trials = 1000
    for t in range(trials):
        state = select_committee(cands, size, derive_round_seed(777, t), epoch=0, cyc=5)
        for member in state.members:
            counts[member] += 1
    p = size / len(cands)
    sigma = (trials * p * (1 - p)) ** 0.5
    for nid, c in counts.items():
        assert abs(c - trials * p) <= 3.5 * sigma, (nid, c)


def test_committee_pool_too_small():
    with pytest.raises(InsufficientPoolError):
        select_committee(candidates(3), 4, b"s", epoch=0, cyc=5)
    with pytest.raises(DomainError):
        select_committee(candidates(5), 2, b"s", epoch=0, cyc=5)


# -- seed derivation --------------------------------------------------------------


def test_round_seed_documented_construction():
    import hashlib

    expected = hashlib.sha256(
        (42).to_bytes(8, "big") + (7).to_bytes(8, "big")
    ).digest()
    assert derive_round_seed(42, 7) == expected


def test_label_seed_stable_and_distinct():
    a = derive_label_seed(42, "cell-a")
    b = derive_label_seed(42, "cell-b")
    assert a == derive_label_seed(42, "cell-a")
    assert a != b
