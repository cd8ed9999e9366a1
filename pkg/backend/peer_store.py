from typing import Dict, Iterator, Tuple

from backend.errors import RecordNotFoundError


class PeerStore:
    """每位 peer、每個 slot 保存的資料（記憶體內），key = (slot, peer)。"""

    def __init__(self):
        self._records: Dict[Tuple[int, int], object] = {}

    def put(self, slot: int, peer: int, record):
        self._records[(slot, peer)] = record

    def get(self, slot: int, peer: int):
        try:
            return self._records[(slot, peer)]
        except KeyError:
            raise RecordNotFoundError(f"no record for peer {peer} at slot {slot}") from None

    def has(self, slot: int, peer: int) -> bool:
        return (slot, peer) in self._records

    def erase(self, slot: int, peer: int):
        """模擬 peer 故障：刪除紀錄，不存在也不報錯。"""
        self._records.pop((slot, peer), None)

    def items(self) -> Iterator[Tuple[Tuple[int, int], object]]:
        # 依 (slot, peer) 排序，快照輸出才會穩定
        for key in sorted(self._records):
            yield key, self._records[key]

    def __len__(self) -> int:
        return len(self._records)
