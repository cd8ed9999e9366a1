"""單一 zone 的改寫攻擊：攻擊者隨機控制 c 個 peer（看不到樹的結構），
事先決定要改哪個明文位置 j；只有 j 的子樹與根全部落在被控制的 peer 上才改得動。
"""
import itertools
from fractions import Fraction
from typing import Optional

import numpy as np

from backend.errors import ConfigurationError, InvalidInputError
from backend.tree_cipher import CipherKey, corruption_oracle, rooted_trees, sample_key
from adversary_lab.trials import TrialSummary

EXACT_MAX_M = 4


def zone_corruption_bound(m: int, c: int) -> float:
    """c(c−1)/(m(m−1))"""
    if m < 2:
        return 1.0 if c >= m else 0.0
    return c * (c - 1) / (m * (m - 1))


def zone_corruption_once(m: int, c: int, rng: np.random.Generator) -> bool:
    key = sample_key(m, rng)
    corrupted = {int(p) for p in rng.choice(m, size=c, replace=False)}
    target = int(rng.integers(0, m))
    return corruption_oracle(key, corrupted, {target})


def zone_corruption_trial(m: int, c: int, trials: int, rng: np.random.Generator,
                          seed: Optional[int] = None) -> TrialSummary:
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    if not 1 <= c <= m:
        raise InvalidInputError(f"c={c} outside [1, {m}]")
    successes = sum(zone_corruption_once(m, c, rng) for _ in range(trials))
    return TrialSummary("zone_corruption", trials, successes, zone_corruption_bound(m, c), seed,
                        extra={"m": m, "c": c, "square_bound": (c / m) ** 2, "linear_bound": c / m})


def zone_corruption_exact(m: int, c: int) -> Fraction:
    """窮舉所有 (樹, 指派, 被控制集合, 目標位置)。翻轉位元不影響結果，所以略過。"""
    if m > EXACT_MAX_M:
        raise ConfigurationError(f"exhaustive oracle limited to m <= {EXACT_MAX_M}")
    if not 1 <= c <= m:
        raise InvalidInputError(f"c={c} outside [1, {m}]")

    wins = 0
    total = 0
    flips = (0,) * m
    subsets = list(itertools.combinations(range(m), c))
    for tree in rooted_trees(m):
        for assignment in itertools.permutations(range(m)):
            key = CipherKey(tree, flips, assignment)
            for corrupted in subsets:
                for target in range(m):
                    total += 1
                    wins += corruption_oracle(key, corrupted, {target})
    return Fraction(wins, total)
