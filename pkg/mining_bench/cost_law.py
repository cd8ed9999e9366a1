"""不放回抽球模型下的期望挖礦成本。

nonce 空間有 2^q 個，其中比例 p′/p 會落在可接受的 hash 子集（藍球），其餘為紅球；
第一次抽到藍球的期望次數 = (藍 + 紅 + 1) / (藍 + 1) ≈ p/p′。
"""
import logging
from fractions import Fraction
from typing import Dict, List, Sequence

from backend.errors import ConfigurationError, UndefinedError

logger = logging.getLogger(__name__)

# p′ 與 p/p′ 至少要這麼大才算在 1 ≪ p′ ≪ p 的範圍內
REGIME_MARGIN = 16


def urn_expected_draws(blue: int, red: int) -> Fraction:
    if blue < 1:
        raise UndefinedError("need at least one blue ball")
    if red < 0:
        raise ConfigurationError("red must be >= 0")
    return Fraction(blue + red + 1, blue + 1)


def in_law_regime(p_bits: int, fraction: float) -> bool:
    accepted = fraction * 2 ** p_bits
    return accepted >= REGIME_MARGIN and 1 / fraction >= REGIME_MARGIN


def mining_cost_law(p_bits: int, fraction: float, q_bits: int) -> float:
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"fraction={fraction} must lie in (0, 1]")
    if not in_law_regime(p_bits, fraction):
        logger.warning("fraction %g with %d-bit hashes is outside the 1 << p' << p regime", fraction, p_bits)
    total = 2 ** q_bits
    blue = max(1, round(fraction * total))
    return float(urn_expected_draws(blue, total - blue))


def expected_tries_threshold(fraction: float) -> float:
    """放回抽樣（幾何分布）的對照值 1/fraction。"""
    if not 0 < fraction <= 1:
        raise ConfigurationError(f"fraction={fraction} must lie in (0, 1]")
    return 1 / fraction


def law_sweep(fractions: Sequence[float], p_bits: int = 64, q_bits: int = 32) -> List[Dict[str, float]]:
    return [{
        "fraction": f,
        "law": mining_cost_law(p_bits, f, q_bits),
        "with_replacement": expected_tries_threshold(f),
    } for f in fractions]
