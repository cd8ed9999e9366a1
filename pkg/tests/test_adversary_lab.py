import math
from fractions import Fraction

import numpy as np
import pytest

from adversary_lab.availability import (availability_bounds, availability_exact, availability_trial,
                                        zone_size_bounds)
from adversary_lab.confidentiality import confidentiality_probe
from adversary_lab.consistent_corruption import (attacked_zone_count, consistent_corruption_trial,
                                                 total_corruption_threshold, even_split,
                                                 joint_corruption_bound, minimal_total_corruption)
from adversary_lab.denial_of_service import dos_erasure_scenario, dos_tolerance
from adversary_lab.exposure_scan import dynamic_exposure_scan, half_network_zones
from adversary_lab.hash_corruption import field_for_bits, hash_corruption_exact, hash_corruption_trial
from adversary_lab.scenarios import apply_attack, corrupt_zone_block
from adversary_lab.trials import SIGMA_MULTIPLIER, AttackSpec, TrialSummary, merge_summaries
from adversary_lab.zone_corruption import (zone_corruption_bound, zone_corruption_exact,
                                           zone_corruption_trial)
from backend.errors import AmbiguousRecoveryError, ConfigurationError, InvalidInputError
from backend.ledger_core import ChainConfig, build_chain, decode_zone, hash_step, zone_hash
from backend.recovery import recover_block


def within_tolerance(estimate, p, trials):
    return abs(estimate - p) <= SIGMA_MULTIPLIER * math.sqrt(p * (1 - p) / trials) + 1e-12


# ====== 共用結果格式 ======

def test_trial_summary_radius_and_merge():
    parts = [TrialSummary("x", 100, 10, 0.2), TrialSummary("x", 300, 30, 0.2)]
    merged = merge_summaries(parts)
    assert merged.trials == 400 and merged.successes == 40
    assert merged.estimate == pytest.approx(0.1)
    assert merged.radius == pytest.approx(3 * math.sqrt(0.09 / 400))
    assert merged.within_bound()
    assert merged.to_record()["estimate"] == pytest.approx(0.1)
    with pytest.raises(InvalidInputError):
        TrialSummary("x", 10, 11, None)


def test_attack_spec_validation():
    AttackSpec(1, b"x", (1, 2, 4)).validate(4)
    with pytest.raises(InvalidInputError):
        AttackSpec(1, b"x", (5,)).validate(4)


# ====== hash 改寫 ======

def test_field_for_bits():
    assert field_for_bits(5).modulus == 31
    assert field_for_bits(61).modulus == 2 ** 61 - 1


@pytest.mark.parametrize("m", [2, 3])
def test_hash_corruption_exact_small_field(m, rng):
    assert hash_corruption_exact(m, 5, rng) == Fraction(1, 31 - m)


def test_hash_corruption_trial_matches_exact(rng):
    trials = 20_000
    summary = hash_corruption_trial(2, 5, trials, rng)
    assert summary.bound == pytest.approx(1 / 29)
    assert within_tolerance(summary.estimate, 1 / 29, trials)


def test_hash_corruption_all_shares_held(rng):
    summary = hash_corruption_trial(4, 61, 50, rng, corrupted=4)
    assert summary.estimate == 1.0
    assert summary.bound == 1.0


def test_hash_corruption_wide_field_never_succeeds(rng):
    summary = hash_corruption_trial(4, 64, 300, rng)
    assert summary.successes == 0
    assert summary.extra["corrupted"] == 3


# ====== 單一 zone ======

@pytest.mark.parametrize("m", [2, 3, 4])
def test_zone_corruption_exact_extremes(m):
    assert zone_corruption_exact(m, 1) == 0
    assert zone_corruption_exact(m, m) == 1


@pytest.mark.parametrize("m", [2, 3, 4])
def test_zone_corruption_exact_below_bound(m):
    for c in range(1, m + 1):
        assert zone_corruption_exact(m, c) <= Fraction(c * (c - 1), m * (m - 1))


def test_zone_corruption_exact_m3():
    # 只有非根的葉節點能用兩個 peer 改寫：機率 4/9 · 1/3
    assert zone_corruption_exact(3, 2) == Fraction(4, 27)


def test_zone_corruption_trial_matches_exact(rng):
    trials = 20_000
    summary = zone_corruption_trial(3, 2, trials, rng)
    assert within_tolerance(summary.estimate, 4 / 27, trials)


def test_zone_corruption_trial_m6_under_bound(rng):
    for c in (2, 3, 5):
        summary = zone_corruption_trial(6, c, 4000, rng)
        assert summary.bound == pytest.approx(zone_corruption_bound(6, c))
        assert summary.within_bound()
        assert summary.bound <= summary.extra["square_bound"] <= summary.extra["linear_bound"]


def test_zone_corruption_errors(rng):
    with pytest.raises(ConfigurationError):
        zone_corruption_exact(5, 2)
    with pytest.raises(InvalidInputError):
        zone_corruption_trial(4, 0, 10, rng)


# ====== 多 zone 一致改寫 ======

def test_attacked_zone_count():
    assert attacked_zone_count(24, 4) == 3
    assert attacked_zone_count(8, 4) == 1
    with pytest.raises(InvalidInputError):
        attacked_zone_count(12, 4)


def test_joint_bound_example(rng):
    summary = consistent_corruption_trial(24, 6, [3, 3], 4000, rng)
    assert summary.extra["product_bound"] == pytest.approx(0.04)
    assert summary.bound == pytest.approx(0.0625)
    assert summary.within_bound()


def test_full_control_always_succeeds(rng):
    summary = consistent_corruption_trial(24, 6, [6, 6], 200, rng)
    assert summary.estimate == 1.0
    assert joint_corruption_bound(24, 6, [6, 6]) == pytest.approx(1.0)


def test_even_split():
    assert even_split(7, 3, 4) == [3, 2, 2]
    with pytest.raises(InvalidInputError):
        even_split(13, 3, 4)


def test_minimal_total_meets_threshold(rng):
    result = minimal_total_corruption(24, 6, 0.1, 500, rng)
    assert result["threshold"] == pytest.approx(total_corruption_threshold(24, 6, 0.1))
    assert result["minimal_total"] == 12
    assert result["satisfied"]
    assert result["sweep"][-1]["estimate"] >= 0.9


# ====== 動態分配的擴散 ======

def test_exposure_scan_single_round():
    initial = half_network_zones(8, 4)
    assert initial == {0, 1, 2, 3}
    result = dynamic_exposure_scan(8, 4, initial, 1)
    assert result["per_slot"] == [4]
    assert result["slots_to_full"] == 1
    assert result["within_bound"]


def test_exposure_scan_48_4():
    initial = half_network_zones(48, 4)
    assert len(initial) == 24
    result = dynamic_exposure_scan(48, 4, initial, 8)
    assert result["per_slot"][:6] == [4] * 6
    assert result["slots_to_full"] == 6
    assert result["bound"] == 6
    assert result["within_bound"]
    assert result["min_new_per_slot_holds"]
    assert result["cumulative"][-1] == 48


def test_exposure_scan_needs_half_network():
    with pytest.raises(InvalidInputError):
        dynamic_exposure_scan(24, 4, {0, 1, 2}, 5)


# ====== 可用性 ======

def test_availability_trial_matches_exact(rng):
    trials = 20_000
    summary = availability_trial(16, 4, 0.3, trials, rng)
    exact = availability_exact(16, 4, 0.3)
    assert summary.extra["exact"] == pytest.approx(exact)
    assert within_tolerance(summary.estimate, exact, trials)


def test_availability_no_faults(rng):
    summary = availability_trial(24, 4, 0.0, 500, rng)
    assert summary.estimate == 1.0
    with pytest.raises(InvalidInputError):
        availability_trial(24, 4, 1.0, 10, rng)


def test_availability_bounds_consistent():
    for n, m, rho in [(16, 4, 0.3), (64, 8, 0.2), (64, 4, 0.1)]:
        bounds = availability_bounds(n, m, rho)
        assert 1 - availability_exact(n, m, rho) <= bounds["failure_upper_bound"] + 1e-12


def test_zone_size_necessary_condition():
    bounds = zone_size_bounds(64, 0.5, 0.1)
    assert bounds["sufficient_max_m"] <= bounds["necessary_max_m"]
    # 超過必要上限的 zone 大小一定達不到 1-δ
    assert availability_exact(64, 8, 0.5) < 0.9
    with pytest.raises(InvalidInputError):
        zone_size_bounds(64, 0.0, 0.1)


# ====== 服務阻斷 ======

def test_dos_scenario(chain_24_4, rng):
    assert dos_tolerance(24, 4) == 6
    result = dos_erasure_scenario(chain_24_4, 2, rng)
    assert result == {
        "tolerance": 6,
        "survived_partial_erasure": True,
        "repair_restored_all": True,
        "lost_after_full_erasure": True,
        "repair_refused_after_full_erasure": True,
    }


def test_corrupt_zone_rejects_identity_rewrite(chain_24_4, rng):
    with pytest.raises(InvalidInputError):
        corrupt_zone_block(chain_24_4, 2, 0, chain_24_4.ground_truth(2), rng)
    with pytest.raises(InvalidInputError):
        corrupt_zone_block(chain_24_4, 2, 0, b"short", rng)


def _flipped(state, t):
    return bytes(b ^ 0xFF for b in state.ground_truth(t))


def test_partial_control_rewrites_nothing(chain_24_4, rng):
    spec = AttackSpec(2, _flipped(chain_24_4, 2), (3, 3, 0, 0, 0, 0))
    attacked = apply_attack(chain_24_4, spec, rng)
    assert len(attacked) == 6
    for z in range(chain_24_4.zone_count()):
        assert decode_zone(chain_24_4, 2, z) == chain_24_4.ground_truth(2)


def test_attack_spec_with_peer_sets(chain_24_4, rng):
    zones = chain_24_4.allocation(2).zones
    replacement = _flipped(chain_24_4, 2)
    per_zone = (set(zones[0]), frozenset(), frozenset(), frozenset(), frozenset(), frozenset())
    assert apply_attack(chain_24_4, AttackSpec(2, replacement, per_zone), rng) == sorted(zones[0])
    assert decode_zone(chain_24_4, 2, 0) == replacement
    with pytest.raises(InvalidInputError):
        apply_attack(chain_24_4, AttackSpec(2, replacement, (set(zones[1]),) + per_zone[1:]), rng)
    with pytest.raises(InvalidInputError):
        apply_attack(chain_24_4, AttackSpec(2, replacement, (4, 4)), rng)


def test_adaptive_attack_defeats_static_zones():
    config = ChainConfig(n=24, m=4, block_bytes=48, hash_width=64, seed=7, dynamic=False)
    per_zone = (4, 4, 4, 0, 0, 0)

    state = build_chain(config, 6, np.random.default_rng(7))
    apply_attack(state, AttackSpec(2, _flipped(state, 2), per_zone), np.random.default_rng(1))
    assert recover_block(state, 2).recovered == state.ground_truth(2)

    state = build_chain(config, 6, np.random.default_rng(7))
    forged = _flipped(state, 2)
    apply_attack(state, AttackSpec(2, forged, per_zone, adaptive=True), np.random.default_rng(1))
    forged_prev = hash_step(state.prev_hash(2), forged, 64)
    assert zone_hash(state, 3, 0) == int.from_bytes(forged_prev, "big")
    assert zone_hash(state, 3, 5) == int.from_bytes(state.prev_hash(3), "big")
    # 攻擊者的 zone 沿鏈一路自洽，hash 比對淘汰不了任何人
    with pytest.raises(AmbiguousRecoveryError):
        recover_block(state, 2)


def test_adaptive_full_control_matches_suffix_rewrite(chain_24_4, rng):
    forged = _flipped(chain_24_4, 2)
    apply_attack(chain_24_4, AttackSpec(2, forged, (4,) * 6, adaptive=True), rng)
    report = recover_block(chain_24_4, 2)
    assert report.unanimous and report.recovered == forged
    for t in range(3, chain_24_4.head + 1):
        assert recover_block(chain_24_4, t).recovered == chain_24_4.ground_truth(t)


# ====== 機密性 ======

def test_full_leak_leaves_several_candidates(rng):
    report = confidentiality_probe(2, 2, 50, rng)
    assert report["key_space_size"] == 16
    assert 2 <= report["min_candidates"] <= report["max_candidates"] <= 16
    assert report["max_candidate_bits"] <= report["key_entropy_bits"]


@pytest.mark.parametrize("m,leaked", [(2, 1), (3, 2), (3, 1)])
def test_partial_leak_posterior_uniform(m, leaked, rng):
    report = confidentiality_probe(m, leaked, 20, rng)
    assert report["posterior_uniform"]
    assert report["max_posterior_spread"] == 0
    assert report["plaintext_space"] == 2 ** m


def test_probe_limits(rng):
    with pytest.raises(ConfigurationError):
        confidentiality_probe(5, 2, 1, rng)
    with pytest.raises(InvalidInputError):
        confidentiality_probe(3, 4, 1, rng)


@pytest.mark.slow
@pytest.mark.parametrize("n,m,rho", [(64, 4, 0.1), (64, 8, 0.2), (24, 6, 0.3)])
def test_availability_grid(n, m, rho, rng):
    trials = 100_000
    summary = availability_trial(n, m, rho, trials, rng)
    exact = availability_exact(n, m, rho)
    assert within_tolerance(summary.estimate, exact, trials)
    failure = 1 - summary.estimate
    assert failure <= summary.extra["failure_upper_bound"] + summary.radius + 1e-12


@pytest.mark.slow
@pytest.mark.parametrize("c", [2, 3, 4, 5])
def test_zone_corruption_m6_large(c, rng):
    summary = zone_corruption_trial(6, c, 100_000, rng)
    assert summary.within_bound()
