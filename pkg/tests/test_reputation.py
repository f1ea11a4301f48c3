import math
import random

import pytest

from oraclesim.errors import DomainError
from oraclesim.reputation import (
    ReputationParams,
    accuracy_score,
    apply_reputation_cap,
    committee_reward,
    diversity_adjustment,
    punish,
    reputation_weight,
    response_time_score,
    response_time_score_from_sums,
    sigmoid,
    update_reputation,
)

REL = 1e-9


def params(**kw):
    return ReputationParams(**kw)


# -- cap ---------------------------------------------------------------------


def test_cap_identity_below_threshold():
    assert apply_reputation_cap(80.0, params(cap_threshold=100.0)) == 80.0


def test_cap_at_exact_threshold_is_continuous():
    assert apply_reputation_cap(100.0, params(cap_threshold=100.0)) == 100.0


def test_cap_decay_above_threshold():
    # 150 / e^((150-100)/50) = 150/e
    got = apply_reputation_cap(150.0, params(cap_threshold=100.0, decay_scale=50.0))
    assert got == pytest.approx(55.1819161757163482, rel=REL)


def test_cap_output_never_exceeds_input():
    p = params(cap_threshold=100.0, decay_scale=50.0)
    for r in [0.5, 50, 99.999, 100, 100.001, 130, 500, 5000]:
        assert apply_reputation_cap(float(r), p) <= r


def test_cap_monotone_below_threshold_and_capped_branch_extremum():
    # x * e^(-(x - cap)/scale) is stationary at x = scale, so the capped branch
    # peaks at max(cap, scale); with scale < cap it only decreases
    p = params(cap_threshold=100.0, decay_scale=40.0)
    xs = [1 + 99 * i / 999 for i in range(1000)]
    ys = [apply_reputation_cap(x, p) for x in xs]
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    scan = [100.0 + 300.0 * i / 3000 for i in range(3001)]
    capped = [(apply_reputation_cap(x, p), x) for x in scan]
    assert max(capped)[1] == pytest.approx(100.0, abs=0.2)
    assert all(a[0] >= b[0] for a, b in zip(capped, capped[1:]))
    # with scale > cap the interior stationary point is at x = scale
    p2 = params(cap_threshold=50.0, decay_scale=200.0)
    scan2 = [50.0 + 500.0 * i / 5000 for i in range(5001)]
    capped2 = [(apply_reputation_cap(x, p2), x) for x in scan2]
    assert max(capped2)[1] == pytest.approx(200.0, abs=0.5)


def test_cap_rejects_nonpositive():
    with pytest.raises(DomainError):
        apply_reputation_cap(0.0, params())
    with pytest.raises(DomainError):
        apply_reputation_cap(-5.0, params())


# -- sigmoid -----------------------------------------------------------------


def test_sigmoid_bounds_and_center():
    assert sigmoid(0.0) == 0.5
    for x in [-700, -30, -2, -0.1, 0.3, 5, 40, 700]:
        v = sigmoid(float(x))
        assert 0.0 < v < 1.0


def test_sigmoid_symmetry():
    rng = random.Random(5)
    for _ in range(200):
        x = rng.uniform(-40, 40)
        assert abs(sigmoid(-x) - (1.0 - sigmoid(x))) < 1e-12


# -- accuracy ----------------------------------------------------------------


def test_accuracy_all_passed():
    assert accuracy_score(10, [5, 5]) == 1.0


def test_accuracy_none_passed():
    assert accuracy_score(0, [5, 5]) == 0.0


def test_accuracy_direct_fraction():
    # 7 passes out of 4+3+3 assigned, tallied round by round: 0.7
    per_round_passes = [3, 2, 2]
    assert sum(per_round_passes) == 7
    assert accuracy_score(sum(per_round_passes), [4, 3, 3]) == pytest.approx(0.7, rel=REL)


def test_accuracy_untested_default_is_zero():
    assert accuracy_score(0, []) == 0.0
    assert accuracy_score(0, [0, 0, 0]) == 0.0


def test_accuracy_rejects_impossible_counts():
    with pytest.raises(DomainError):
        accuracy_score(8, [3, 4])


# -- reputation weight ---------------------------------------------------------


def test_weight_symmetry_for_equal_population():
    reps = [100.0] * 6
    for i in range(6):
        assert reputation_weight(reps, i, 1.0) == pytest.approx(1.0, rel=REL)


def test_weight_direct_fractions():
    reps = [100.0, 300.0]
    assert reputation_weight(reps, 0, 1.0) == pytest.approx(0.5, rel=REL)
    assert reputation_weight(reps, 1, 1.0) == pytest.approx(1.5, rel=REL)
    total = sum(reputation_weight(reps, i, 1.0) for i in range(2))
    assert total == pytest.approx(2.0, rel=REL)  # sums to N * diversity


def test_weight_scales_linearly_in_diversity():
    reps = [10.0, 70.0, 20.0]
    for i in range(3):
        assert reputation_weight(reps, i, 2.0) == pytest.approx(
            2.0 * reputation_weight(reps, i, 1.0), rel=REL
        )


def test_weight_population_mean_equals_diversity_factor():
    rng = random.Random(17)
    for _ in range(20):
        n = rng.randint(1, 40)
        reps = [rng.uniform(0.1, 500.0) for _ in range(n)]
        delta = rng.uniform(0.2, 3.0)
        mean = sum(reputation_weight(reps, i, delta) for i in range(n)) / n
        assert mean == pytest.approx(delta, rel=1e-9)


def test_weight_rejects_empty_and_nonpositive():
    with pytest.raises(DomainError):
        reputation_weight([], 0)
    with pytest.raises(DomainError):
        reputation_weight([1.0, 0.0], 0)


def test_diversity_adjustment_neutral_and_clamped():
    assert diversity_adjustment(5, 10, 2) == pytest.approx(1.0, rel=REL)
    assert diversity_adjustment(0, 10, 1000) == pytest.approx(0.999, rel=REL)
    assert diversity_adjustment(10, 10, 1) == 1.0  # 1 + (1 - 1) = 1
    assert diversity_adjustment(0, 1000, 1) == 0.5  # clamped low


# -- response time -------------------------------------------------------------


def test_rt_zero_for_constant_times():
    assert response_time_score([2.0, 2.0, 2.0], 4) == 0.0


def test_rt_direct_example():
    # times 1,3: mean 2, population sd 1, CV 0.5; over N=2 -> 0.25
    assert response_time_score([1.0, 3.0], 2) == pytest.approx(0.25, rel=REL)


def test_rt_single_sample_and_empty():
    assert response_time_score([5.0], 10) == 0.0
    assert response_time_score([], 10) == 0.0


def test_rt_running_sums_match_direct():
    rng = random.Random(23)
    for _ in range(50):
        m = rng.randint(1, 30)
        times = [rng.uniform(0.01, 9.0) for _ in range(m)]
        n = rng.randint(1, 50)
        direct = response_time_score(times, n)
        from_sums = response_time_score_from_sums(
            len(times), sum(times), sum(t * t for t in times), n
        )
        assert from_sums == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_rt_rejects_nonpositive_times():
    with pytest.raises(DomainError):
        response_time_score([1.0, 0.0], 3)


# -- update -------------------------------------------------------------------


def test_update_multiplier_degenerates_to_one():
    p = params(accuracy_weight=1e-9, weight_weight=1e-9, timing_weight=1e-9)
    got = update_reputation(0.7, 1.0, 0.2, p, 100.0)
    assert got == pytest.approx(100.0, rel=1e-6)


def test_update_direct_example():
    # sigma(0)=0.5 exactly: (0.5*1 + 0.3*0.5 + 0.2*0.5 + 1) * 100 = 175
    p = params(accuracy_weight=0.5, weight_weight=0.3, timing_weight=0.2)
    got = update_reputation(1.0, 0.0, 0.0, p, 100.0)
    assert got == pytest.approx(175.0, rel=REL)


def test_update_multiplier_bounds():
    rng = random.Random(31)
    p = params(accuracy_weight=0.5, weight_weight=0.3, timing_weight=0.2)
    upper = 1 + 0.5 + 0.3 + 0.2
    for _ in range(300):
        ac = rng.uniform(0, 1)
        rw = rng.uniform(-50, 50)
        rt = rng.uniform(0, 50)
        acc = rng.uniform(0.01, 2000)
        ratio = update_reputation(ac, rw, rt, p, acc) / acc
        assert 1.0 < ratio < upper


def test_update_inverted_rt_orientation():
    literal = params(rt_orientation="literal")
    inverted = params(rt_orientation="inverted")
    rt = 3.0
    got_lit = update_reputation(0.5, 0.0, rt, literal, 100.0)
    got_inv = update_reputation(0.5, 0.0, rt, inverted, 100.0)
    expect_lit = (0.5 * 0.5 + 0.3 * 0.5 + 0.2 * sigmoid(3.0) + 1) * 100
    expect_inv = (0.5 * 0.5 + 0.3 * 0.5 + 0.2 * sigmoid(0.25) + 1) * 100
    assert got_lit == pytest.approx(expect_lit, rel=REL)
    assert got_inv == pytest.approx(expect_inv, rel=REL)


def test_update_rejects_bad_accuracy():
    with pytest.raises(DomainError):
        update_reputation(1.5, 0.0, 0.0, params(), 100.0)


# -- committee reward -----------------------------------------------------------


def test_reward_identity_case():
    p = params(workload_min=0.5, workload_max=2.0, workload_exponent=3.7)
    assert committee_reward([50.0], [1.0], 5, 5, p) == pytest.approx(50.0, rel=REL)


def test_reward_clamps_at_max():
    p = params(workload_min=0.5, workload_max=2.0, workload_exponent=1.0)
    got = committee_reward([40.0, 60.0], [1.0, 1.0], 20, 5, p)
    unclamped = (100.0 / 2) * 4.0
    assert got == pytest.approx(100.0, rel=REL)
    assert got < unclamped


def test_reward_clamps_at_min():
    p = params(workload_min=0.5, workload_max=2.0, workload_exponent=2.0)
    got = committee_reward([80.0], [1.0], 0, 7, p)
    assert got == pytest.approx(80.0 * 0.25, rel=REL)


def test_reward_invariant_under_contribution_scaling_after_normalization():
    rng = random.Random(41)
    p = params()
    for _ in range(50):
        n = rng.randint(1, 8)
        reps = [rng.uniform(1, 300) for _ in range(n)]
        raw = [rng.uniform(0, 5) for _ in range(n)]
        if sum(raw) == 0:
            raw[0] = 1.0
        scale = rng.uniform(0.1, 40)
        norm = [w / sum(raw) for w in raw]
        scaled = [w * scale for w in raw]
        norm2 = [w / sum(scaled) for w in scaled]
        d, cyc = rng.uniform(0, 30), rng.uniform(1, 10)
        a = committee_reward(reps, norm, d, cyc, p)
        b = committee_reward(reps, norm2, d, cyc, p)
        assert a == pytest.approx(b, rel=1e-12)


def test_reward_rejects_all_zero_weights():
    with pytest.raises(DomainError):
        committee_reward([50.0, 60.0], [0.0, 0.0], 1, 1, params())


# -- punishment ----------------------------------------------------------------


def test_punish_unit_denominator_when_log_is_one():
    # base + offset = e makes ln() = 1 for any dishonesty count
    p = params(punish_base=2, punish_offset=math.e - 2.0)
    for d in (0, 1, 5, 9):
        assert punish(100.0, d, p) == pytest.approx(100.0, rel=1e-12)


def test_punish_direct_values():
    p = params(punish_base=9, punish_offset=1.0, punish_adjust=0.0)
    assert punish(100.0, 1, p) == pytest.approx(43.4294481903251828, rel=REL)
    assert punish(100.0, 2, p) == pytest.approx(18.8611697011613929, rel=REL)


def test_punish_strictly_decreasing_when_log_exceeds_one():
    p = params(punish_base=9, punish_offset=1.0)
    values = [punish(100.0, d, p) for d in range(8)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_punish_increasing_when_log_below_one():
    # base + offset in (1, e): ln in (0,1), so dividing grows the score
    p = params(punish_base=1, punish_offset=0.5)
    values = [punish(100.0, d, p) for d in range(5)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_default_params_punish_shrinks():
    p = params()
    assert math.log(p.punish_base + p.punish_offset) > 1.0


def test_punish_domain_errors():
    with pytest.raises(DomainError):
        punish(0.0, 1, params())
    with pytest.raises(DomainError):
        params(punish_base=0, punish_offset=0.5)


# -- parameter validation ---------------------------------------------------------


def test_params_reject_bad_component_weights():
    with pytest.raises(DomainError):
        params(accuracy_weight=0.0)
    with pytest.raises(DomainError):
        params(weight_weight=1.0)


def test_params_reject_bad_workload_bounds():
    with pytest.raises(DomainError):
        params(workload_min=2.0, workload_max=1.0)
    with pytest.raises(DomainError):
        params(workload_min=0.0)
