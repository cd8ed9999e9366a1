"""跨 zone 的一致性改寫：攻擊者同時攻擊 n/(2m) 個 zone，每個 zone 各自獨立成功才算數。"""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from backend.errors import InvalidInputError
from backend.zone_scheduler import validate_zone_params
from adversary_lab.trials import TrialSummary
from adversary_lab.zone_corruption import zone_corruption_bound, zone_corruption_once

logger = logging.getLogger(__name__)


def attacked_zone_count(n: int, m: int) -> int:
    validate_zone_params(n, m)
    if n % (2 * m):
        raise InvalidInputError(f"n/(2m) must be an integer, got n={n}, m={m}")
    return n // (2 * m)


def joint_corruption_bound(n: int, m: int, per_zone_c: Sequence[int]) -> float:
    """exp((n/m)·ln(2Σc/n))"""
    total = sum(per_zone_c)
    if total == 0:
        return 0.0
    return math.exp((n / m) * math.log(2 * total / n))


def total_corruption_threshold(n: int, m: int, eps: float) -> float:
    """成功率達 1−ε 所需的最少總腐化數 (n/2)(1−ε)^(m/n)。"""
    return (n / 2) * (1 - eps) ** (m / n)


def consistent_corruption_trial(n: int, m: int, per_zone_c: Sequence[int], trials: int,
                                rng: np.random.Generator, seed: Optional[int] = None) -> TrialSummary:
    zones = attacked_zone_count(n, m)
    if len(per_zone_c) != zones:
        raise InvalidInputError(f"expected {zones} per-zone counts, got {len(per_zone_c)}")
    if any(not 1 <= c <= m for c in per_zone_c):
        raise InvalidInputError(f"per-zone counts must lie in [1, {m}]")

    successes = 0
    for _ in range(trials):
        # all() 短路：前面的 zone 失敗就不必再抽
        if all(zone_corruption_once(m, c, rng) for c in per_zone_c):
            successes += 1

    product_bound = math.prod(zone_corruption_bound(m, c) for c in per_zone_c)
    return TrialSummary("consistent_corruption", trials, successes,
                        joint_corruption_bound(n, m, per_zone_c), seed,
                        extra={"n": n, "m": m, "per_zone_c": list(per_zone_c),
                               "total_corrupted": sum(per_zone_c), "product_bound": product_bound})


def even_split(total: int, zones: int, m: int) -> List[int]:
    base, extra = divmod(total, zones)
    counts = [base + (1 if i < extra else 0) for i in range(zones)]
    if any(c > m for c in counts):
        raise InvalidInputError(f"{total} corruptions do not fit in {zones} zones of {m}")
    return counts


def minimal_total_corruption(n: int, m: int, eps: float, trials: int,
                             rng: np.random.Generator) -> Dict[str, object]:
    """由小到大掃 Σc（平均分給被攻擊的 zone），找出第一個經驗成功率 ≥ 1−ε 的值。"""
    if not 0 < eps < 1:
        raise InvalidInputError("eps must lie in (0, 1)")
    zones = attacked_zone_count(n, m)
    threshold = total_corruption_threshold(n, m, eps)

    sweep = []
    minimal = None
    for total in range(zones, zones * m + 1):
        summary = consistent_corruption_trial(n, m, even_split(total, zones, m), trials, rng)
        sweep.append({"total": total, "estimate": summary.estimate})
        if summary.estimate >= 1 - eps:
            minimal = total
            break

    if minimal is not None and minimal < threshold:
        logger.warning("minimal corruption %d below the total-corruption threshold %.3f", minimal, threshold)
    return {
        "n": n,
        "m": m,
        "eps": eps,
        "minimal_total": minimal,
        "threshold": threshold,
        "satisfied": minimal is not None and minimal >= threshold,
        "sweep": sweep,
    }
