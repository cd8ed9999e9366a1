"""Ground-truth hash chain plus per-peer zone-coded storage.

每個 slot t 依 zone 分配把區塊 B_t 交給 n/m 個 zone 各自加密保存：
每個 zone 抽一把新金鑰，碎片一人一段，序列化後的金鑰與 H_{t-1}
都用 (m, m) Shamir 分給 zone 內的 peer。
"""
import hashlib
import logging
import math
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from sympy import nextprime

from backend.errors import (AmbiguousRecoveryError, ConfigurationError, DecodeError, InvalidInputError,
                            UnrecoverableError, UnrepairableError)
from backend.finite_field import PrimeField
from backend.peer_store import PeerStore
from backend.secret_sharing import (KEY_FIELD, SecretShare, reconstruct,
                                    reconstruct_bytes, split, split_bytes)
from backend.tree_cipher import decrypt, deserialize_key, encrypt, sample_key, serialize_key
from backend.zone_scheduler import ZoneAllocation, ZoneSchedule, validate_zone_params

logger = logging.getLogger(__name__)

DEFAULT_HASH_WIDTH = 64
MAX_HASH_WIDTH = 256

# 紀錄的二進位格式：表頭 + 碎片 + 金鑰 shares + hash shares + 指派 + zone
RECORD_HEADER = struct.Struct(">IHHH")
RECORD_TRAILER = struct.Struct(">BH")


@dataclass(frozen=True)
class ChainConfig:
    n: int
    m: int
    block_bytes: int
    hash_width: int = DEFAULT_HASH_WIDTH
    seed: int = 0
    dynamic: bool = True

    def __post_init__(self):
        validate_zone_params(self.n, self.m)
        if self.block_bytes < 0 or self.block_bytes % self.m:
            raise ConfigurationError(f"block_bytes={self.block_bytes} must be divisible by m={self.m}")
        if self.hash_width % 8 or not 8 <= self.hash_width <= MAX_HASH_WIDTH:
            raise ConfigurationError(f"hash_width={self.hash_width} must be a multiple of 8 in [8, 256]")


@dataclass(frozen=True)
class PeerSlotRecord:
    fragment: bytes
    key_shares: Tuple[SecretShare, ...]
    key_length: int
    hash_shares: Tuple[SecretShare, ...]
    local_assignment: int
    zone: int


def genesis_hash(width: int = DEFAULT_HASH_WIDTH) -> bytes:
    return bytes(width // 8)


def hash_step(prev: bytes, block: bytes, width: int = DEFAULT_HASH_WIDTH) -> bytes:
    """H_t = SHA-256(H_{t-1} || B_t)，截到 width bits。"""
    return hashlib.sha256(prev + block).digest()[:width // 8]


class ChainState:
    def __init__(self, config: ChainConfig):
        self.config = config
        self.schedule = ZoneSchedule(config.n, config.m, config.dynamic)
        # hash 值要能單射進分享用的質數體
        self.hash_field = PrimeField(int(nextprime(max(2 ** config.hash_width, config.n))))
        self.blocks: List[Tuple[bytes, bytes]] = []
        self.hashes: List[bytes] = [genesis_hash(config.hash_width)]
        self.store = PeerStore()
        self.counters: Counter = Counter()

    @property
    def head(self) -> int:
        """T：目前最後一個已提交的 slot（從 1 起算）。"""
        return len(self.blocks)

    def allocation(self, t: int) -> ZoneAllocation:
        return self.schedule.allocation(t)

    def zone_count(self) -> int:
        return self.config.n // self.config.m

    def prev_hash(self, t: int) -> bytes:
        return self.hashes[t - 1]

    def ground_truth(self, t: int) -> bytes:
        self._check_slot(t)
        return self.blocks[t - 1][1]

    def _check_slot(self, t: int):
        if not 1 <= t <= self.head:
            raise InvalidInputError(f"slot {t} is not committed (head={self.head})")

    def hash_to_int(self, value: bytes) -> int:
        return int.from_bytes(value, "big")


def encode_zone(state: ChainState, t: int, z: int, block: bytes, prev_hash: bytes,
                rng: np.random.Generator) -> None:
    """對 zone z 重新抽金鑰、加密並覆寫 zone 內 m 筆紀錄。"""
    m = state.config.m
    members = state.allocation(t).zones[z]
    key = sample_key(m, rng)
    fragments = encrypt(block, key)
    key_bytes = serialize_key(key)
    key_lists = split_bytes(key_bytes, m, m, rng, counters=state.counters)
    hash_shares = split(state.hash_to_int(prev_hash), m, m, rng, field=state.hash_field,
                        counters=state.counters)

    for i, peer in enumerate(members):
        state.store.put(t, peer, PeerSlotRecord(
            fragment=fragments[i],
            key_shares=tuple(key_lists[i]),
            key_length=len(key_bytes),
            hash_shares=(hash_shares[i],),
            local_assignment=key.assignment[i],
            zone=z,
        ))


def _zone_records(state: ChainState, t: int, z: int) -> Optional[List[PeerSlotRecord]]:
    members = state.allocation(t).zones[z]
    if not all(state.store.has(t, peer) for peer in members):
        return None
    return [state.store.get(t, peer) for peer in members]


def decode_zone(state: ChainState, t: int, z: int) -> Optional[bytes]:
    """用 zone z 的 shares 重建金鑰並解密；少任何一筆紀錄或金鑰壞掉就回傳 None。"""
    records = _zone_records(state, t, z)
    if records is None:
        return None
    m = state.config.m
    try:
        key_bytes = reconstruct_bytes([r.key_shares for r in records], m, records[0].key_length)
        key = deserialize_key(key_bytes, m)
        return decrypt([r.fragment for r in records], key)
    except (DecodeError, InvalidInputError) as e:
        logger.debug("zone %d at slot %d does not decode: %s", z, t, e)
        return None


def zone_hash(state: ChainState, t: int, z: int) -> Optional[int]:
    """zone z 在 slot t 保存的 H_{t-1}（以整數表示）。"""
    records = _zone_records(state, t, z)
    if records is None:
        return None
    shares = [r.hash_shares[0] for r in records]
    try:
        return reconstruct(shares, state.config.m, field=state.hash_field)
    except InvalidInputError:
        return None


def commit_block(state: ChainState, block: bytes, rng: np.random.Generator) -> ChainState:
    config = state.config
    if len(block) != config.block_bytes or len(block) % config.m:
        raise InvalidInputError(f"block must be {config.block_bytes} bytes, got {len(block)}")

    t = state.head + 1
    prev = state.hashes[-1]
    for z in range(state.zone_count()):
        encode_zone(state, t, z, block, prev, rng)

    state.blocks.append((prev, block))
    state.hashes.append(hash_step(prev, block, config.hash_width))
    state.counters["hash_evals"] += 1
    state.counters["commits"] += 1
    logger.debug("committed slot %d across %d zones", t, state.zone_count())
    return state


def build_chain(config: ChainConfig, blocks: int, rng: Optional[np.random.Generator] = None) -> ChainState:
    """提交 blocks 個均勻隨機區塊。"""
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    state = ChainState(config)
    for _ in range(blocks):
        commit_block(state, rng.bytes(config.block_bytes), rng)
    return state


def erase_record(state: ChainState, t: int, peer: int):
    state.store.erase(t, peer)


def repair_zone(state: ChainState, t: int, z: int,
                rng: Optional[np.random.Generator] = None) -> ChainState:
    """走一次完整讀取（hash 比對 + 多數決）取回 B_t，再用新金鑰重編 zone z。

    H_{t-1} 取自解出同一個 B_t、且成員未被淘汰的其他 zone，同樣多數決。
    """
    # recovery 依賴本模組，只能在這裡匯入
    from backend.recovery import recover_block

    state._check_slot(t)
    try:
        report = recover_block(state, t)
    except (AmbiguousRecoveryError, UnrecoverableError) as e:
        raise UnrepairableError(f"slot {t} cannot be recovered for repair: {e}") from e
    block = report.recovered

    zones = state.allocation(t).zones
    width = state.config.hash_width
    votes: Counter = Counter()
    donors = []
    for candidate, decoded in sorted(report.per_zone_candidates.items()):
        if candidate == z or decoded != block:
            continue
        if report.eliminated_peers.intersection(zones[candidate]):
            continue
        prev = zone_hash(state, t, candidate)
        if prev is not None and prev < 2 ** width:
            votes[prev] += 1
            donors.append(candidate)
    if not votes:
        raise UnrepairableError(f"no other zone of slot {t} holds the recovered block")
    ranked = votes.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        raise UnrepairableError(f"donor zones of slot {t} disagree on the previous hash")

    if rng is None:
        rng = np.random.default_rng([state.config.seed, t, z, state.counters["repairs"]])
    encode_zone(state, t, z, block, ranked[0][0].to_bytes(width // 8, "big"), rng)
    state.counters["repairs"] += 1
    logger.info("repaired zone %d at slot %d from %d donor zones", z, t, len(donors))
    return state


# ====== 儲存成本 ======

def serialize_record(record: PeerSlotRecord, hash_field: PrimeField) -> bytes:
    key_width = KEY_FIELD.byte_width
    hash_width = hash_field.byte_width
    out = bytearray(RECORD_HEADER.pack(len(record.fragment), record.key_length,
                                       len(record.key_shares), len(record.hash_shares)))
    out += record.fragment
    for share in record.key_shares:
        out += share.x.to_bytes(key_width, "big") + share.y.to_bytes(key_width, "big")
    for share in record.hash_shares:
        out += share.x.to_bytes(hash_width, "big") + share.y.to_bytes(hash_width, "big")
    out += RECORD_TRAILER.pack(record.local_assignment, record.zone)
    return bytes(out)


def deserialize_record(data: bytes, hash_field: PrimeField) -> PeerSlotRecord:
    key_width = KEY_FIELD.byte_width
    hash_width = hash_field.byte_width
    try:
        frag_len, key_length, n_key, n_hash = RECORD_HEADER.unpack_from(data, 0)
        pos = RECORD_HEADER.size
        fragment = data[pos:pos + frag_len]
        pos += frag_len

        def read_shares(count, width):
            nonlocal pos
            shares = []
            for _ in range(count):
                x = int.from_bytes(data[pos:pos + width], "big")
                y = int.from_bytes(data[pos + width:pos + 2 * width], "big")
                shares.append(SecretShare(x, y))
                pos += 2 * width
            return tuple(shares)

        key_shares = read_shares(n_key, key_width)
        hash_shares = read_shares(n_hash, hash_width)
        assignment, zone = RECORD_TRAILER.unpack_from(data, pos)
        pos += RECORD_TRAILER.size
    except struct.error as e:
        raise DecodeError(f"truncated peer record: {e}") from e
    if pos != len(data) or len(fragment) != frag_len:
        raise DecodeError("peer record length mismatch")
    return PeerSlotRecord(fragment, key_shares, key_length, hash_shares, assignment, zone)


def storage_breakdown(state: ChainState, peer: int, slot: int) -> Dict[str, int]:
    record = state.store.get(slot, peer)
    key_width = KEY_FIELD.byte_width
    hash_width = state.hash_field.byte_width
    return {
        "fragment": 8 * len(record.fragment),
        "key_shares": 8 * 2 * key_width * len(record.key_shares),
        "hash_shares": 8 * 2 * hash_width * len(record.hash_shares),
        "assignment": 8,
        # 長度前綴與 zone 編號
        "overhead": 8 * (RECORD_HEADER.size + RECORD_TRAILER.size - 1),
    }


def storage_cost_measured(state: ChainState, peer: int, slot: int) -> int:
    return sum(storage_breakdown(state, peer, slot).values())


def storage_cost_formula(q_bits: float, p_bits: float, m: int) -> Tuple[float, float, float]:
    """(傳統全複製成本, 分散式成本, 節省量)，單位 bits / peer / 交易。"""
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    baseline = q_bits + p_bits
    distributed = q_bits / m + 2 * m * math.log2(m) + 2 * p_bits + 1
    return baseline, distributed, baseline - distributed


def storage_cost_general(q_bits: float, key_bits: float, p_bits: float, m: int) -> Dict[str, float]:
    """一般加密方案（碼字空間 = q）的每 peer 成本與節省量。"""
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    distributed = q_bits / m + 2 * key_bits + 2 * p_bits
    return {
        "baseline": q_bits + p_bits,
        "distributed": distributed,
        "gain": (m - 1) / m * q_bits - 2 * key_bits - p_bits,
    }
