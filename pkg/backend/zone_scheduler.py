"""動態 zone 分配：把 peer 切成 2n' 組（每組 m/2 人），再用 circle method
依序走過 K_{2n'} 的 2n'-1 個完美匹配，每一對組合併成一個 zone。
"""
import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import networkx as nx

from backend.errors import ConfigurationError


@dataclass(frozen=True)
class GroupLayout:
    n: int
    m: int
    groups: Tuple[Tuple[int, ...], ...]

    @property
    def group_count(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class ZoneAllocation:
    slot: int
    zones: Tuple[Tuple[int, ...], ...]

    def zone_of(self) -> Dict[int, int]:
        """peer → zone index"""
        return {peer: z for z, zone in enumerate(self.zones) for peer in zone}


def validate_zone_params(n: int, m: int):
    if m < 2 or m % 2:
        raise ConfigurationError(f"zone size m={m} must be even and >= 2")
    if n < m or n % m:
        raise ConfigurationError(f"peer count n={n} must be a positive multiple of m={m}")


def _validate_divisible(n: int, m: int):
    if m < 1 or n < m or n % m:
        raise ConfigurationError(f"peer count n={n} must be a positive multiple of m={m}")


def layout(n: int, m: int) -> GroupLayout:
    validate_zone_params(n, m)
    half = m // 2
    groups = tuple(tuple(range(g * half, (g + 1) * half)) for g in range(n // half))
    return GroupLayout(n, m, groups)


def group_matching(group_count: int, t: int) -> List[Tuple[int, int]]:
    """circle method 第 t 輪：組 0 在圓心，其餘 1..N-1 在正 (N-1) 邊形頂點上。"""
    spokes = group_count - 1
    r = t % spokes
    pairs = [(0, 1 + r)]
    for k in range(1, group_count // 2):
        a = 1 + (r + k) % spokes
        b = 1 + (r - k) % spokes
        pairs.append((min(a, b), max(a, b)))
    return pairs


def allocation_at(group_layout: GroupLayout, t: int) -> ZoneAllocation:
    zones = []
    for a, b in group_matching(group_layout.group_count, t):
        zones.append(tuple(sorted(group_layout.groups[a] + group_layout.groups[b])))
    zones.sort()
    return ZoneAllocation(t, tuple(zones))


class ZoneSchedule:
    """dynamic=False 時每個 slot 都沿用第 0 輪的分配（靜態分區對照組）。"""

    def __init__(self, n: int, m: int, dynamic: bool = True):
        self.layout = layout(n, m)
        self.dynamic = dynamic
        self._cache: Dict[int, ZoneAllocation] = {}

    @property
    def period(self) -> int:
        return coverage_slots(self.layout.n, self.layout.m)

    def allocation(self, t: int) -> ZoneAllocation:
        round_index = t % self.period if self.dynamic else 0
        if round_index not in self._cache:
            self._cache[round_index] = allocation_at(self.layout, round_index)
        cached = self._cache[round_index]
        return ZoneAllocation(t, cached.zones)


def coverage_slots(n: int, m: int) -> int:
    validate_zone_params(n, m)
    return 2 * n // m - 1


def handshake_lower_bound(n: int, m: int) -> int:
    """每個 slot 最多認識 m-1 個新 peer，所以至少要 ceil((n-1)/(m-1)) 個 slot。"""
    validate_zone_params(n, m)
    return math.ceil((n - 1) / (m - 1))


def allocation_count(n: int, m: int) -> int:
    # 公式本身不要求 m 為偶數
    _validate_divisible(n, m)
    return math.factorial(n) // math.factorial(m) ** (n // m)


def allocation_count_approx(n: int, m: int) -> float:
    """Stirling 近似，回傳 log2 值以免溢位。"""
    _validate_divisible(n, m)
    k = n / m
    return (0.5 * math.log2(2 * math.pi * n) - k * 0.5 * math.log2(2 * math.pi * m)
            + n * math.log2(k))


def coverage_audit(n: int, m: int) -> dict:
    """檢查一整個週期：每輪是完美匹配、每對組剛好同 zone 一次、所有 peer 兩兩相遇。"""
    group_layout = layout(n, m)
    count = group_layout.group_count
    period = coverage_slots(n, m)
    complete = nx.complete_graph(count)

    pair_counts = {pair: 0 for pair in itertools.combinations(range(count), 2)}
    all_perfect = True
    for t in range(period):
        matching = group_matching(count, t)
        all_perfect &= nx.is_perfect_matching(complete, set(matching))
        for pair in matching:
            pair_counts[pair] += 1

    peer_pairs = set(itertools.combinations(range(n), 2))
    met = set()
    full_coverage_slot = None
    for t in range(period):
        for zone in allocation_at(group_layout, t).zones:
            met.update(itertools.combinations(zone, 2))
        if full_coverage_slot is None and met >= peer_pairs:
            full_coverage_slot = t + 1

    periodic = all(allocation_at(group_layout, t).zones == allocation_at(group_layout, t + period).zones
                   for t in range(period))
    return {
        "n": n,
        "m": m,
        "period": period,
        "lower_bound": handshake_lower_bound(n, m),
        "slots_to_full_coverage": full_coverage_slot,
        "all_pairs_covered": met >= peer_pairs,
        "group_pairs": len(pair_counts),
        "each_group_pair_once": all(v == 1 for v in pair_counts.values()),
        "all_rounds_perfect_matchings": bool(all_perfect),
        "periodic": periodic,
    }
