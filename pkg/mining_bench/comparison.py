"""每提交一個區塊要算幾次 hash：PoW 挖礦 vs. zone 分散式儲存（實際計數）。"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from backend.ledger_core import ChainConfig, build_chain
from mining_bench.cost_law import mining_cost_law
from mining_bench.miner import DEFAULT_NONCE_BITS, DifficultyTarget, mining_runs

logger = logging.getLogger(__name__)


def scheme_cost_comparison(n: int, m: int, p_bits: int, fraction: float, rng: np.random.Generator,
                           blocks: int = 8, block_bytes: Optional[int] = None,
                           nonce_bits: int = DEFAULT_NONCE_BITS) -> Dict[str, float]:
    block_bytes = block_bytes if block_bytes is not None else 4 * m
    config = ChainConfig(n=n, m=m, block_bytes=block_bytes, hash_width=p_bits)
    state = build_chain(config, blocks, rng)
    commits = state.counters["commits"]

    pow_stats = mining_runs(DifficultyTarget(p_bits, fraction), blocks, rng, nonce_bits)
    scheme_hash = state.counters["hash_evals"] / commits
    report = {
        "n": n,
        "m": m,
        "p_bits": p_bits,
        "fraction": fraction,
        "blocks": blocks,
        "pow_hash_evals_per_block": pow_stats["mean_tries"],
        "pow_law": mining_cost_law(p_bits, fraction, nonce_bits),
        "scheme_hash_evals_per_block": scheme_hash,
        "scheme_poly_evals_per_block": state.counters["poly_evals"] / commits,
        "ratio": pow_stats["mean_tries"] / scheme_hash,
    }
    logger.debug("cost comparison: %s", report)
    return report


def mining_sweep(fractions: Sequence[float], runs: int, rng: np.random.Generator,
                 p_bits: int = 64, nonce_bits: int = DEFAULT_NONCE_BITS) -> List[Dict[str, float]]:
    """每個門檻比例挖 runs 次，並附上抽球模型的期望值。"""
    records = []
    for f in fractions:
        stats = mining_runs(DifficultyTarget(p_bits, f), runs, rng, nonce_bits)
        stats.update({"fraction": f, "law": mining_cost_law(p_bits, f, nonce_bits)})
        records.append(stats)
    return records
