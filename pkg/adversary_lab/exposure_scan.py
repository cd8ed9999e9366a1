"""動態分配下，攻擊者為了讓被改寫的鏈保持一致，每個新 slot 得再腐化多少 peer。

只要某個 zone 同時含有被控制與誠實的 peer，攻擊者就必須把整個 zone 拿下。
"""
import logging
import math
from typing import Dict, Iterable, Set

from backend.errors import InvalidInputError
from backend.zone_scheduler import ZoneSchedule, validate_zone_params

logger = logging.getLogger(__name__)


def half_network_zones(n: int, m: int) -> Set[int]:
    """slot 0 前 ceil(n/(2m)) 個 zone 的成員，至少佔一半網路。"""
    validate_zone_params(n, m)
    zones = ZoneSchedule(n, m).allocation(0).zones
    chosen: Set[int] = set()
    for zone in zones[:math.ceil(n / (2 * m))]:
        chosen.update(zone)
    return chosen


def dynamic_exposure_scan(n: int, m: int, initial_corrupted: Iterable[int],
                          slots: int) -> Dict[str, object]:
    validate_zone_params(n, m)
    corrupted = set(initial_corrupted)
    if any(not 0 <= p < n for p in corrupted):
        raise InvalidInputError("corrupted peers must lie in [0, n)")
    if 2 * len(corrupted) < n:
        raise InvalidInputError(f"need at least n/2 = {n / 2} corrupted peers, got {len(corrupted)}")

    schedule = ZoneSchedule(n, m, dynamic=True)
    per_slot = []
    cumulative = []
    full_slot = 0 if len(corrupted) == n else None
    min_new_per_slot_holds = True
    weak_only = []

    for t in range(1, slots + 1):
        honest_before = n - len(corrupted)
        newly: Set[int] = set()
        for zone in schedule.allocation(t).zones:
            members = set(zone)
            if members & corrupted:
                newly |= members - corrupted
        corrupted |= newly
        per_slot.append(len(newly))
        cumulative.append(len(corrupted))

        if honest_before > 0 and len(newly) < m:
            min_new_per_slot_holds = False
            if len(newly) >= 2:
                weak_only.append(t)
                logger.warning("slot %d forced only %d new corruptions (< m=%d)", t, len(newly), m)
        if full_slot is None and len(corrupted) == n:
            full_slot = t

    bound = n / (2 * m)
    return {
        "n": n,
        "m": m,
        "per_slot": per_slot,
        "cumulative": cumulative,
        "slots_to_full": full_slot,
        "bound": bound,
        "within_bound": full_slot is not None and full_slot <= bound,
        "min_new_per_slot_holds": min_new_per_slot_holds,
        "weak_count_slots": weak_only,
    }
