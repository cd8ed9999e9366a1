"""Monte Carlo 共用的結果格式與信賴半徑。"""
import math
from dataclasses import dataclass, field
from typing import List, Optional

from backend.errors import InvalidInputError

SIGMA_MULTIPLIER = 3


def binomial_sigma(estimate: float, trials: int) -> float:
    if trials <= 0:
        return 0.0
    return math.sqrt(max(estimate * (1 - estimate), 0.0) / trials)


@dataclass
class TrialSummary:
    experiment: str
    trials: int
    successes: int
    bound: Optional[float]
    seed: Optional[int] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise InvalidInputError(f"successes={self.successes} outside [0, {self.trials}]")

    @property
    def estimate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def sigma(self) -> float:
        return binomial_sigma(self.estimate, self.trials)

    @property
    def radius(self) -> float:
        """3σ 二項信賴半徑"""
        return SIGMA_MULTIPLIER * self.sigma

    def within_bound(self) -> bool:
        return self.bound is None or self.estimate - self.radius <= self.bound

    def to_record(self) -> dict:
        record = {
            "experiment": self.experiment,
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "sigma": self.sigma,
            "bound": self.bound,
            "seed": self.seed,
        }
        record.update(self.extra)
        return record


def merge_summaries(parts: List[TrialSummary]) -> TrialSummary:
    """把同一實驗的多個 batch 相加（各 batch 用獨立的 rng stream）。"""
    if not parts:
        raise InvalidInputError("nothing to merge")
    first = parts[0]
    return TrialSummary(
        experiment=first.experiment,
        trials=sum(p.trials for p in parts),
        successes=sum(p.successes for p in parts),
        bound=first.bound,
        seed=first.seed,
        extra=dict(first.extra),
    )


@dataclass(frozen=True)
class AttackSpec:
    """主動攻擊者的目標：把 slot target_slot 的區塊改成 replacement。

    per_zone_corruption 依 zone 順序給每個 zone 被控制的 peer 數（取 zone 的前 c 位）
    或明確的 peer 集合；adaptive 表示 zone 重新洗牌後攻擊者是否繼續改寫下游 slot。
    """
    target_slot: int
    replacement: bytes
    per_zone_corruption: tuple
    adaptive: bool = False

    def validate(self, m: int):
        for c in self.per_zone_corruption:
            count = len(c) if isinstance(c, (set, frozenset, tuple, list)) else c
            if not 0 <= count <= m:
                raise InvalidInputError(f"per-zone corruption {count} outside [0, {m}]")
