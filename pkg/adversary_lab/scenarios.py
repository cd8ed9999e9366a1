"""腳本化的主動攻擊：攻擊者完全控制某些 zone，改寫它們保存的區塊。

攻擊者知道明文與整條鏈（在 access list 上），但只能改寫被控制 peer 的紀錄；
ground truth（state.blocks / state.hashes）永遠不動，供事後比對。
"""
import logging
from typing import Iterable, List, Set

import numpy as np

from adversary_lab.trials import AttackSpec
from backend.errors import InvalidInputError
from backend.ledger_core import ChainState, encode_zone, hash_step

logger = logging.getLogger(__name__)


def _check_replacement(state: ChainState, t: int, replacement: bytes):
    state._check_slot(t)
    if len(replacement) != state.config.block_bytes:
        raise InvalidInputError(f"replacement must be {state.config.block_bytes} bytes")
    if replacement == state.ground_truth(t):
        raise InvalidInputError("replacement must differ from the committed block")


def corrupt_zone_block(state: ChainState, t: int, z: int, replacement: bytes,
                       rng: np.random.Generator) -> List[int]:
    """只改 slot t 的 zone z；下游 slot 保存的 hash 維持原樣（stale）。回傳被控制的 peer。"""
    _check_replacement(state, t, replacement)
    encode_zone(state, t, z, replacement, state.prev_hash(t), rng)
    members = list(state.allocation(t).zones[z])
    logger.debug("zone %d at slot %d rewritten by %d corrupted peers", z, t, len(members))
    return members


def _controlled_peers(state: ChainState, spec: AttackSpec) -> Set[int]:
    zones = state.allocation(spec.target_slot).zones
    if len(spec.per_zone_corruption) != len(zones):
        raise InvalidInputError(f"per_zone_corruption needs {len(zones)} entries, "
                                f"got {len(spec.per_zone_corruption)}")
    controlled: Set[int] = set()
    for members, c in zip(zones, spec.per_zone_corruption):
        if isinstance(c, int):
            controlled.update(members[:c])
            continue
        if not set(c) <= set(members):
            raise InvalidInputError(f"peers {sorted(set(c) - set(members))} are not in zone {members}")
        controlled.update(c)
    return controlled


def apply_attack(state: ChainState, spec: AttackSpec, rng: np.random.Generator) -> List[int]:
    """依 AttackSpec 改寫 slot target_slot。

    只有被完全控制（c_z = m）的 zone 能改成 replacement，其餘 zone 維持原樣。
    adaptive=True 時，被控制的 peer 在之後每個 slot 只要剛好湊滿某個 zone，
    就把該 zone 重編成攻擊者版本的 hash chain。回傳被控制的 peer。
    """
    t = spec.target_slot
    _check_replacement(state, t, spec.replacement)
    spec.validate(state.config.m)
    controlled = _controlled_peers(state, spec)

    rewritten = [z for z, members in enumerate(state.allocation(t).zones)
                 if set(members) <= controlled]
    for z in rewritten:
        corrupt_zone_block(state, t, z, spec.replacement, rng)
    if not rewritten:
        logger.info("no zone at slot %d is fully controlled; nothing rewritten", t)

    if spec.adaptive and rewritten:
        width = state.config.hash_width
        prev = hash_step(state.prev_hash(t), spec.replacement, width)
        for tau in range(t + 1, state.head + 1):
            block = state.ground_truth(tau)
            for z, members in enumerate(state.allocation(tau).zones):
                if set(members) <= controlled:
                    encode_zone(state, tau, z, block, prev, rng)
            prev = hash_step(prev, block, width)
    return sorted(controlled)


def corrupt_zones(state: ChainState, t: int, zones: Iterable[int], replacement: bytes,
                  rng: np.random.Generator) -> List[int]:
    """完全控制 zones 內的每位 peer，其他 zone 不動。"""
    targets = set(zones)
    if not targets <= set(range(state.zone_count())):
        raise InvalidInputError(f"zones {sorted(targets)} out of range for {state.zone_count()} zones")
    m = state.config.m
    per_zone = tuple(m if z in targets else 0 for z in range(state.zone_count()))
    return apply_attack(state, AttackSpec(t, replacement, per_zone), rng)


def rewrite_chain_suffix(state: ChainState, t: int, replacement: bytes,
                         rng: np.random.Generator) -> List[bytes]:
    """控制所有 peer：slot t 全部 zone 改成 replacement，並用攻擊者的 hash chain
    重新編碼 t+1 .. T 的每個 zone，讓整條鏈保持一致。回傳攻擊者版本的 H_t .. H_T。
    """
    _check_replacement(state, t, replacement)
    width = state.config.hash_width
    prev = state.prev_hash(t)
    forged: List[bytes] = []

    block = replacement
    for tau in range(t, state.head + 1):
        if tau > t:
            block = state.ground_truth(tau)
        for z in range(state.zone_count()):
            encode_zone(state, tau, z, block, prev, rng)
        prev = hash_step(prev, block, width)
        forged.append(prev)
    logger.info("chain suffix rewritten from slot %d to %d", t, state.head)
    return forged
