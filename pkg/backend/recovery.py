"""區塊讀取：各 zone 解密出候選區塊，不一致時沿 hash chain 往後檢查、淘汰
對不上的 peer，最後由存活 peer 多數決。另附傳統全複製做法的多數決作為對照。
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from backend.errors import AmbiguousRecoveryError, InvalidInputError, UnrecoverableError
from backend.ledger_core import ChainState, decode_zone, hash_step, zone_hash

logger = logging.getLogger(__name__)


@dataclass
class RecoveryReport:
    slot: int
    recovered: Optional[bytes]
    per_zone_candidates: Dict[int, bytes]
    eliminated_peers: Set[int] = field(default_factory=set)
    slots_scanned: int = 0
    unanimous: bool = False

    def to_record(self) -> dict:
        return {
            "slot": self.slot,
            "recovered": self.recovered.hex() if self.recovered is not None else None,
            "per_zone_candidates": {str(z): b.hex() for z, b in sorted(self.per_zone_candidates.items())},
            "eliminated_peers": sorted(self.eliminated_peers),
            "slots_scanned": self.slots_scanned,
            "unanimous": self.unanimous,
        }


def _majority(votes: List[bytes], what: str) -> bytes:
    ranked = Counter(votes).most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        raise AmbiguousRecoveryError(f"{what}: tie between {ranked[0][1]}-vote candidates")
    return ranked[0][0]


def _zone_inconsistencies(state: ChainState, tau: int) -> Set[int]:
    """slot τ 各 zone 算出的 h(W_τ) 與每位成員在 τ+1 所屬 zone 保存的 H_τ 比對，回傳對不上的 peer。"""
    width = state.config.hash_width
    next_zone_of = state.allocation(tau + 1).zone_of()
    next_hashes: Dict[int, Optional[int]] = {}
    flagged: Set[int] = set()

    for z, members in enumerate(state.allocation(tau).zones):
        prev = zone_hash(state, tau, z)
        block = decode_zone(state, tau, z)
        if prev is None or block is None:
            continue
        if prev >= 2 ** width:
            # 重建出的 hash 超出寬度，一定是被竄改過
            flagged.update(members)
            continue
        computed = int.from_bytes(hash_step(prev.to_bytes(width // 8, "big"), block, width), "big")
        for peer in members:
            z_next = next_zone_of[peer]
            if z_next not in next_hashes:
                next_hashes[z_next] = zone_hash(state, tau + 1, z_next)
            stored = next_hashes[z_next]
            if stored is not None and stored != computed:
                flagged.add(peer)
    return flagged


def recover_block(state: ChainState, t: int, scan_limit: Optional[int] = None) -> RecoveryReport:
    """比對 τ = t .. min(T-1, t + scan_limit) 的 hash（τ+1 必須已提交）；scan_limit=None 表示一路比到鏈尾。"""
    state._check_slot(t)
    if scan_limit is not None and scan_limit < 0:
        raise InvalidInputError("scan_limit must be >= 0")

    allocation = state.allocation(t)
    candidates: Dict[int, bytes] = {}
    for z in range(len(allocation.zones)):
        block = decode_zone(state, t, z)
        if block is not None:
            candidates[z] = block
    if not candidates:
        raise UnrecoverableError(f"no zone can decode slot {t}")

    report = RecoveryReport(slot=t, recovered=None, per_zone_candidates=candidates)
    if len(set(candidates.values())) == 1:
        report.recovered = next(iter(candidates.values()))
        report.unanimous = True
        return report

    # 只有能解出候選的 zone 的成員才有投票權
    voters = {peer: candidates[z] for z, members in enumerate(allocation.zones)
              if z in candidates for peer in members}
    last = state.head - 1 if scan_limit is None else min(state.head - 1, t + scan_limit)
    for tau in range(t, last + 1):
        flagged = _zone_inconsistencies(state, tau)
        report.slots_scanned += 1
        newly = flagged - report.eliminated_peers
        if newly:
            logger.debug("slot %d: eliminated %d peers at tau=%d", t, len(newly), tau)
        report.eliminated_peers |= flagged
        surviving = {voters[p] for p in voters if p not in report.eliminated_peers}
        if len(surviving) <= 1:
            break

    votes = [block for peer, block in sorted(voters.items()) if peer not in report.eliminated_peers]
    if not votes:
        raise UnrecoverableError(f"every voter for slot {t} was eliminated")
    report.recovered = _majority(votes, f"slot {t}")
    return report


# ====== 傳統全複製對照組 ======

@dataclass
class ReplicatedChain:
    """每位 peer 保存完整的鏈：copies[peer][t-1] = B_t。"""
    n: int
    copies: List[List[bytes]]

    def corrupt(self, peer: int, t: int, block: bytes):
        self.copies[peer][t - 1] = block


def replicate_chain(state: ChainState) -> ReplicatedChain:
    truth = [block for _, block in state.blocks]
    return ReplicatedChain(state.config.n, [list(truth) for _ in range(state.config.n)])


def recover_baseline(replicated: ReplicatedChain, t: int) -> bytes:
    if not replicated.copies or not 1 <= t <= len(replicated.copies[0]):
        raise InvalidInputError(f"slot {t} is not in the replicated chain")
    return _majority([copy[t - 1] for copy in replicated.copies], f"baseline slot {t}")
