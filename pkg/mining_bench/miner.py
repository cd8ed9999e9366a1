"""Proof-of-work 挖礦：不重複地列舉 nonce，直到 SHA-256(nonce || data) 截斷後低於門檻。"""
import hashlib
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, Optional

import numpy as np

from backend.errors import ConfigurationError, MiningExhaustedError

logger = logging.getLogger(__name__)

DEFAULT_NONCE_BITS = 32


@dataclass(frozen=True)
class DifficultyTarget:
    hash_width_bits: int = 64
    target_fraction: float = 1.0

    def __post_init__(self):
        if not 0 < self.target_fraction <= 1:
            raise ConfigurationError(f"target_fraction={self.target_fraction} must lie in (0, 1]")
        if self.hash_width_bits % 8 or not 8 <= self.hash_width_bits <= 256:
            raise ConfigurationError("hash width must be a multiple of 8 in [8, 256]")

    @property
    def threshold(self) -> int:
        """hash 值 < threshold 才接受；fraction = 1 時全部接受。"""
        return math.ceil(self.target_fraction * 2 ** self.hash_width_bits)

    def accepts(self, value: int) -> bool:
        return value < self.threshold


@dataclass(frozen=True)
class MiningResult:
    nonce: int
    nonce_bits: int
    hash: bytes
    tries: int

    @property
    def hash_value(self) -> int:
        return int.from_bytes(self.hash, "big")


def pow_hash(nonce: int, nonce_bits: int, prev_data: bytes, width: int) -> bytes:
    # 直接把 nonce 接在前面，只做一次 SHA-256
    nonce_bytes = nonce.to_bytes((nonce_bits + 7) // 8, "big")
    return hashlib.sha256(nonce_bytes + prev_data).digest()[:width // 8]


def nonce_order(nonce_bits: int, rng: Optional[np.random.Generator] = None) -> Iterator[int]:
    """rng 為 None 時依序 0, 1, 2 ...；否則用 a·i + c mod 2^b（a 為奇數）打散，仍然不重複。"""
    space = 1 << nonce_bits
    if rng is None:
        yield from range(space)
        return
    a = int(rng.integers(0, space >> 1, dtype=np.uint64)) * 2 + 1 if space > 1 else 1
    c = int(rng.integers(0, space, dtype=np.uint64)) if space > 1 else 0
    for i in range(space):
        yield (a * i + c) % space


def mine(prev_data: bytes, target: DifficultyTarget, nonce_bits: int = DEFAULT_NONCE_BITS,
         rng: Optional[np.random.Generator] = None) -> MiningResult:
    if not 1 <= nonce_bits <= 64:
        raise ConfigurationError("nonce_bits must lie in [1, 64]")
    width = target.hash_width_bits
    tries = 0
    for nonce in nonce_order(nonce_bits, rng):
        tries += 1
        digest = pow_hash(nonce, nonce_bits, prev_data, width)
        if target.accepts(int.from_bytes(digest, "big")):
            return MiningResult(nonce, nonce_bits, digest, tries)
    raise MiningExhaustedError(f"no nonce in 2^{nonce_bits} satisfies fraction {target.target_fraction}")


def mining_runs(target: DifficultyTarget, runs: int, rng: np.random.Generator,
                nonce_bits: int = DEFAULT_NONCE_BITS, data_bytes: int = 32) -> Dict[str, float]:
    """獨立挖 runs 次（每次不同的前一區塊資料），回傳嘗試次數的平均與標準誤。"""
    tries = []
    exhausted = 0
    for _ in range(runs):
        try:
            tries.append(mine(rng.bytes(data_bytes), target, nonce_bits, rng).tries)
        except MiningExhaustedError:
            exhausted += 1
    counts = np.array(tries, dtype=np.float64)
    mean = float(counts.mean()) if counts.size else float("nan")
    sigma = float(counts.std(ddof=1) / math.sqrt(counts.size)) if counts.size > 1 else 0.0
    if exhausted:
        logger.warning("%d of %d mining runs exhausted the nonce space", exhausted, runs)
    return {"runs": runs, "mean_tries": mean, "sigma": sigma, "exhausted": exhausted}
