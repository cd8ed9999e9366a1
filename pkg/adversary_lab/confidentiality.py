"""洩漏部分或全部碎片時，旁觀者對明文還剩多少不確定性（小 m 窮舉）。

* 全部 m 段碎片外洩：用所有金鑰解密，數不同的候選明文。
* 只洩漏部分碎片：每段明文限定在 {0x00, 0xFF}，窮舉 (區塊, 金鑰)，
  檢查各區塊的後驗次數是否完全相同。
"""
import itertools
import math
from typing import Dict, List

import numpy as np

from backend.errors import ConfigurationError, InvalidInputError
from backend.tree_cipher import (decrypt, encrypt, enumerate_keys, key_entropy_bits,
                                 key_space_size, sample_key)

MAX_PROBE_M = 4
BINARY_ALPHABET = (0x00, 0xFF)


def _candidate_count(fragments: List[bytes], keys) -> int:
    return len({decrypt(fragments, key) for key in keys})


def _binary_blocks(m: int) -> List[bytes]:
    return [bytes(symbols) for symbols in itertools.product(BINARY_ALPHABET, repeat=m)]


def confidentiality_probe(m: int, leaked_peers: int, trials: int,
                          rng: np.random.Generator) -> Dict[str, object]:
    if m > MAX_PROBE_M:
        raise ConfigurationError(f"exhaustive probe limited to m <= {MAX_PROBE_M}")
    if m < 1 or not 0 <= leaked_peers <= m:
        raise InvalidInputError(f"leaked_peers={leaked_peers} outside [0, {m}]")

    keys = list(enumerate_keys(m))
    report: Dict[str, object] = {
        "m": m,
        "leaked_peers": leaked_peers,
        "trials": trials,
        "key_space_size": key_space_size(m),
        "key_entropy_bits": key_entropy_bits(m),
        "entropy_bound_bits": m * math.log2(m) if m > 1 else 0.0,
    }

    if leaked_peers == m:
        counts = []
        for _ in range(trials):
            block = rng.bytes(m)
            counts.append(_candidate_count(encrypt(block, sample_key(m, rng)), keys))
        worst = max(counts) if counts else 0
        report.update({
            "max_candidates": worst,
            "min_candidates": min(counts) if counts else 0,
            "max_candidate_bits": math.log2(worst) if worst else 0.0,
        })
        return report

    # 部分洩漏：表格 codes[key][block] = 每位 peer 的碎片
    blocks = _binary_blocks(m)
    codes = [[encrypt(block, key) for block in blocks] for key in keys]
    uniform = True
    spread = []
    for _ in range(trials):
        leaked = sorted(int(p) for p in rng.choice(m, size=leaked_peers, replace=False))
        true_key = int(rng.integers(0, len(keys)))
        true_block = int(rng.integers(0, len(blocks)))
        observed = [codes[true_key][true_block][p] for p in leaked]

        posterior = [0] * len(blocks)
        for k in range(len(keys)):
            for b in range(len(blocks)):
                if [codes[k][b][p] for p in leaked] == observed:
                    posterior[b] += 1
        spread.append(max(posterior) - min(posterior))
        uniform &= len(set(posterior)) == 1

    report.update({
        "posterior_uniform": uniform,
        "max_posterior_spread": max(spread) if spread else 0,
        "plaintext_space": len(blocks),
    })
    return report
