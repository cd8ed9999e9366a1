import logging
from typing import Dict

import numpy as np

from backend.errors import UnrecoverableError, UnrepairableError
from backend.ledger_core import ChainState, decode_zone, erase_record, repair_zone
from backend.recovery import recover_block
from backend.zone_scheduler import validate_zone_params

logger = logging.getLogger(__name__)


def dos_tolerance(n: int, m: int) -> int:
    """每個 zone 壞一個 peer 就讀不出來，所以最多撐 n/m 次斷線。"""
    validate_zone_params(n, m)
    return n // m


def _erase_one_per_zone(state: ChainState, t: int, zones, rng: np.random.Generator):
    allocation = state.allocation(t)
    for z in zones:
        members = allocation.zones[z]
        erase_record(state, t, int(members[int(rng.integers(0, len(members)))]))


def dos_erasure_scenario(state: ChainState, t: int, rng: np.random.Generator) -> Dict[str, bool]:
    """三段腳本（會改動 state）：
    1. 除了最後一個 zone 以外每個 zone 刪一位 peer → 仍可讀；
    2. 逐一 repair 被刪的 zone → 全部 zone 恢復可解碼；
    3. 每個 zone 都刪一位 peer → 讀不出來，也無法 repair。
    """
    zone_count = state.zone_count()
    truth = state.ground_truth(t)

    _erase_one_per_zone(state, t, range(zone_count - 1), rng)
    survived = recover_block(state, t).recovered == truth

    for z in range(zone_count - 1):
        repair_zone(state, t, z, rng)
    restored = all(decode_zone(state, t, z) == truth for z in range(zone_count))

    _erase_one_per_zone(state, t, range(zone_count), rng)
    try:
        recover_block(state, t)
        lost = False
    except UnrecoverableError:
        lost = True
    try:
        repair_zone(state, t, 0, rng)
        repair_refused = False
    except UnrepairableError:
        repair_refused = True

    logger.info("dos scenario slot %d: survived=%s restored=%s lost=%s", t, survived, restored, lost)
    return {
        "tolerance": zone_count,
        "survived_partial_erasure": survived,
        "repair_restored_all": restored,
        "lost_after_full_erasure": lost,
        "repair_refused_after_full_erasure": repair_refused,
    }
