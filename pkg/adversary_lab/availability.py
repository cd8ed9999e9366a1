"""peer 各自以機率 ρ 離線時，至少有一個 zone 全員在線（區塊可讀）的機率。"""
import math
from typing import Dict, Optional

import numpy as np

from backend.errors import InvalidInputError
from backend.zone_scheduler import ZoneSchedule
from adversary_lab.trials import TrialSummary

BATCH_TRIALS = 10_000


def availability_exact(n: int, m: int, rho: float) -> float:
    """1 − (1 − (1−ρ)^m)^(n/m)"""
    return 1 - (1 - (1 - rho) ** m) ** (n // m)


def availability_bounds(n: int, m: int, rho: float) -> Dict[str, float]:
    alive = (1 - rho) ** m
    return {
        "expected_live_zones": (n / m) * alive,
        "failure_upper_bound": math.exp(-alive * n / m),
    }


def availability_trial(n: int, m: int, rho: float, trials: int, rng: np.random.Generator,
                       seed: Optional[int] = None) -> TrialSummary:
    if not 0 <= rho < 1:
        raise InvalidInputError(f"rho={rho} must lie in [0, 1)")
    # 各 peer 獨立離線，用哪一個 slot 的分配都一樣
    zones = np.array(ZoneSchedule(n, m).allocation(0).zones)

    successes = 0
    remaining = trials
    while remaining > 0:
        batch = min(BATCH_TRIALS, remaining)
        active = rng.random((batch, n)) >= rho
        successes += int(active[:, zones].all(axis=2).any(axis=1).sum())
        remaining -= batch

    exact = availability_exact(n, m, rho)
    extra = {"n": n, "m": m, "rho": rho, "exact": exact}
    extra.update(availability_bounds(n, m, rho))
    return TrialSummary("availability", trials, successes, exact, seed, extra=extra)


def zone_size_bounds(n: int, rho: float, delta: float) -> Dict[str, float]:
    """成功率至少 1−δ 時 zone 大小的必要上限與充分上限。"""
    if not 0 < rho < 1 or not 0 < delta < 1:
        raise InvalidInputError("rho and delta must lie in (0, 1)")
    scale = math.log(1 / (1 - rho))
    return {
        "necessary_max_m": (math.log(n) - math.log(1 - delta)) / scale,
        "sufficient_max_m": (math.log(n) - math.log(math.log(1 / delta))) / scale,
    }
