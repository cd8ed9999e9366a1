"""ChainState 的 JSON lines 快照。

第一行是表頭 {"kind": "header", "version": 1, "config": {...}, "counters": {...}}，
接著每個 slot 一行 {"kind": "slot", "slot": t, "prev_hash": hex, "block": hex}，
最後每筆 peer 紀錄一行 {"kind": "record", "slot": t, "peer": i, "data": hex}
（data 是 serialize_record 的輸出）。同一個 seed 產生的快照逐 byte 相同。
"""
import json
import logging
from dataclasses import asdict
from pathlib import Path
from typing import Union

from backend.errors import DecodeError
from backend.ledger_core import (ChainConfig, ChainState, deserialize_record, hash_step,
                                 serialize_record)

logger = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1


def _dump(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def save_snapshot(state: ChainState, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(_dump({
            "kind": "header",
            "version": SNAPSHOT_VERSION,
            "config": asdict(state.config),
            "counters": dict(sorted(state.counters.items())),
        }) + "\n")
        for t, (prev, block) in enumerate(state.blocks, start=1):
            f.write(_dump({"kind": "slot", "slot": t, "prev_hash": prev.hex(), "block": block.hex()}) + "\n")
        for (slot, peer), record in state.store.items():
            data = serialize_record(record, state.hash_field)
            f.write(_dump({"kind": "record", "slot": slot, "peer": peer, "data": data.hex()}) + "\n")
    logger.info("saved snapshot of %d slots / %d records to %s", state.head, len(state.store), path)
    return path


def load_snapshot(path: Union[str, Path]) -> ChainState:
    with open(path, "r", encoding="utf-8") as f:
        lines = [line for line in f if line.strip()]
    if not lines:
        raise DecodeError(f"empty snapshot: {path}")

    try:
        header = json.loads(lines[0])
        if header.get("kind") != "header" or header.get("version") != SNAPSHOT_VERSION:
            raise DecodeError("snapshot header missing or unsupported version")
        state = ChainState(ChainConfig(**header["config"]))
        state.counters.update(header.get("counters", {}))

        for line in lines[1:]:
            entry = json.loads(line)
            if entry["kind"] == "slot":
                if entry["slot"] != state.head + 1:
                    raise DecodeError(f"slot {entry['slot']} out of order")
                prev = bytes.fromhex(entry["prev_hash"])
                block = bytes.fromhex(entry["block"])
                if prev != state.hashes[-1]:
                    raise DecodeError(f"hash chain broken at slot {entry['slot']}")
                state.blocks.append((prev, block))
                state.hashes.append(hash_step(prev, block, state.config.hash_width))
            elif entry["kind"] == "record":
                record = deserialize_record(bytes.fromhex(entry["data"]), state.hash_field)
                state.store.put(entry["slot"], entry["peer"], record)
            else:
                raise DecodeError(f"unknown snapshot line kind: {entry['kind']}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        if isinstance(e, DecodeError):
            raise
        raise DecodeError(f"malformed snapshot {path}: {e}") from e
    return state
