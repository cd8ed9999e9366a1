import json

import pytest

from backend.chain_snapshot import load_snapshot, save_snapshot
from backend.errors import DecodeError
from backend.ledger_core import decode_zone


def test_snapshot_round_trip(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    loaded = load_snapshot(path)
    assert loaded.config == small_chain.config
    assert loaded.blocks == small_chain.blocks
    assert loaded.hashes == small_chain.hashes
    assert loaded.counters == small_chain.counters
    assert dict(loaded.store.items()) == dict(small_chain.store.items())
    assert decode_zone(loaded, 3, 1) == small_chain.ground_truth(3)


def test_snapshot_is_byte_stable(small_chain, tmp_path):
    first = save_snapshot(small_chain, tmp_path / "a.jsonl")
    second = save_snapshot(load_snapshot(first), tmp_path / "b.jsonl")
    assert first.read_bytes() == second.read_bytes()


def test_snapshot_line_kinds(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    kinds = [json.loads(line)["kind"] for line in path.read_text(encoding="utf-8").splitlines()]
    assert kinds[0] == "header"
    assert kinds.count("slot") == 5
    assert kinds.count("record") == 5 * 8


def _rewrite(path, index, mutate):
    lines = path.read_text(encoding="utf-8").splitlines()
    entry = json.loads(lines[index])
    mutate(entry)
    lines[index] = json.dumps(entry)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_broken_hash_chain_rejected(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    _rewrite(path, 2, lambda e: e.update(prev_hash="ff" * 8))
    with pytest.raises(DecodeError):
        load_snapshot(path)


def test_bad_header_rejected(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    _rewrite(path, 0, lambda e: e.update(version=99))
    with pytest.raises(DecodeError):
        load_snapshot(path)


def test_unknown_line_and_empty_file(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    _rewrite(path, 1, lambda e: e.update(kind="mystery"))
    with pytest.raises(DecodeError):
        load_snapshot(path)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(DecodeError):
        load_snapshot(empty)


def test_garbled_record_rejected(small_chain, tmp_path):
    path = save_snapshot(small_chain, tmp_path / "chain.jsonl")
    _rewrite(path, 6, lambda e: e.update(data="00"))
    with pytest.raises(DecodeError):
        load_snapshot(path)
