import itertools
import logging
from fractions import Fraction

import pytest

from adversary_lab.trials import SIGMA_MULTIPLIER
from backend.errors import ConfigurationError, MiningExhaustedError, UndefinedError
from mining_bench.comparison import mining_sweep, scheme_cost_comparison
from mining_bench.cost_law import (expected_tries_threshold, in_law_regime, law_sweep,
                                   mining_cost_law, urn_expected_draws)
from mining_bench.miner import DifficultyTarget, mine, mining_runs, nonce_order, pow_hash


def test_fraction_one_accepts_first_nonce(rng):
    result = mine(b"prev", DifficultyTarget(64, 1.0), rng=rng)
    assert result.tries == 1


def test_mined_nonce_is_valid(rng):
    target = DifficultyTarget(64, 2.0 ** -6)
    result = mine(rng.bytes(32), target, nonce_bits=20, rng=rng)
    assert target.accepts(result.hash_value)
    assert result.hash_value < 2 ** 58


def test_pow_hash_is_deterministic():
    a = pow_hash(7, 32, b"data", 64)
    assert a == pow_hash(7, 32, b"data", 64)
    assert a != pow_hash(8, 32, b"data", 64)
    assert len(a) == 8


def test_nonce_order_is_a_permutation(rng):
    assert sorted(nonce_order(8, rng)) == list(range(256))
    assert list(nonce_order(3)) == list(range(8))


def test_exhausted_nonce_space(rng):
    with pytest.raises(MiningExhaustedError):
        mine(b"x", DifficultyTarget(64, 2.0 ** -40), nonce_bits=4, rng=rng)


def test_bad_targets():
    with pytest.raises(ConfigurationError):
        DifficultyTarget(64, 0.0)
    with pytest.raises(ConfigurationError):
        DifficultyTarget(12, 0.5)


def test_mean_tries_near_inverse_fraction(rng):
    stats = mining_runs(DifficultyTarget(64, 2.0 ** -8), 2000, rng, nonce_bits=32)
    assert stats["exhausted"] == 0
    assert abs(stats["mean_tries"] - 256) <= SIGMA_MULTIPLIER * stats["sigma"]


@pytest.mark.parametrize("blue,red,expected", [(1, 0, 1), (1, 1, Fraction(3, 2)), (4, 12, Fraction(17, 5))])
def test_urn_examples(blue, red, expected):
    assert urn_expected_draws(blue, red) == expected


def test_urn_matches_brute_force():
    for total in range(1, 13):
        for blue in range(1, total + 1):
            placements = list(itertools.combinations(range(total), blue))
            mean = Fraction(sum(min(p) + 1 for p in placements), len(placements))
            assert urn_expected_draws(blue, total - blue) == mean


def test_urn_needs_blue_ball():
    with pytest.raises(UndefinedError):
        urn_expected_draws(0, 5)


def test_cost_law_close_to_inverse_fraction():
    assert mining_cost_law(64, 2.0 ** -8, 32) == pytest.approx(256, rel=1e-4)
    assert expected_tries_threshold(2.0 ** -8) == 256


def test_cost_law_grows_as_target_shrinks():
    rows = law_sweep([2.0 ** -k for k in range(2, 12)])
    laws = [r["law"] for r in rows]
    assert laws == sorted(laws)


def test_cost_law_regime_warning(caplog):
    assert not in_law_regime(64, 0.5)
    assert in_law_regime(64, 2.0 ** -8)
    with caplog.at_level(logging.WARNING, logger="mining_bench.cost_law"):
        mining_cost_law(64, 0.5, 32)
    assert "regime" in caplog.text


def test_mining_sweep_records(rng):
    records = mining_sweep([0.5, 0.125], 50, rng, nonce_bits=16)
    assert [r["fraction"] for r in records] == [0.5, 0.125]
    assert all(r["runs"] == 50 for r in records)


def test_scheme_needs_one_hash_per_block(rng):
    report = scheme_cost_comparison(8, 4, 64, 2.0 ** -6, rng, blocks=4, nonce_bits=20)
    assert report["scheme_hash_evals_per_block"] == 1
    # 2 個 zone，每個 zone 金鑰 2 個區塊各 4 份 + hash 4 份
    assert report["scheme_poly_evals_per_block"] == 24
    assert report["ratio"] == report["pow_hash_evals_per_block"]
    assert report["pow_law"] == pytest.approx(64, rel=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("k", range(4, 13))
def test_mean_tries_follow_urn_law(k, rng):
    fraction = 2.0 ** -k
    # k > 8 時每多一階 runs 減半，標準誤跟著放大 sqrt(2)
    runs = 10_000 >> max(0, k - 8)
    stats = mining_runs(DifficultyTarget(64, fraction), runs, rng, nonce_bits=32)
    law = mining_cost_law(64, fraction, 32)
    assert stats["exhausted"] == 0
    assert abs(stats["mean_tries"] - law) <= SIGMA_MULTIPLIER * stats["sigma"] + 1e-9
    if k == 12:
        assert law == pytest.approx(4096, rel=1e-3)
