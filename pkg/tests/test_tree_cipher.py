import itertools
import math
from collections import Counter

import numpy as np
import pytest

from adversary_lab.trials import SIGMA_MULTIPLIER
from backend.errors import ConfigurationError, DecodeError, InvalidInputError
from backend.tree_cipher import (CipherKey, RootedTree, corruption_oracle, decrypt, deserialize_key,
                                 encrypt, enumerate_keys, key_entropy_bits, key_space_size,
                                 rooted_trees, sample_key, serialize_key, serialized_key_length,
                                 single_node_tree, tree_from_prufer)


def tolerance(p, trials):
    return SIGMA_MULTIPLIER * math.sqrt(p * (1 - p) / trials)


def test_single_node_key(rng):
    key = sample_key(1, rng)
    assert key.tree == single_node_tree()
    assert key.assignment == (0,)
    assert len(key.flips) == 1


def test_sample_key_rejects_empty_zone(rng):
    with pytest.raises(InvalidInputError):
        sample_key(0, rng)
    with pytest.raises(ConfigurationError):
        sample_key(256, rng)


@pytest.mark.parametrize("m,count", [(2, 2), (3, 9)])
def test_trees_uniform_over_cayley_count(m, count):
    rng = np.random.default_rng(5)
    draws = 50_000
    seen = Counter(sample_key(m, rng).tree.parent for _ in range(draws))
    assert len(seen) == count
    p = 1 / count
    for freq in seen.values():
        assert abs(freq / draws - p) <= tolerance(p, draws)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_rooted_tree_enumeration_matches_cayley(m):
    trees = list(rooted_trees(m))
    assert len(trees) == m ** (m - 1)
    assert len({(t.parent, t.root) for t in trees}) == m ** (m - 1)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_key_space_size_exact(m):
    keys = list(enumerate_keys(m))
    assert len(keys) == key_space_size(m)
    assert key_space_size(m) >= 2 ** m
    assert math.isclose(key_entropy_bits(m), math.log2(key_space_size(m)))


def test_m1_encrypt_complements():
    key = CipherKey(single_node_tree(), (1,), (0,))
    assert encrypt(b"\x0f\xf0", key) == [b"\xf0\x0f"]
    assert decrypt([b"\xf0\x0f"], key) == b"\x0f\xf0"
    plain = CipherKey(single_node_tree(), (0,), (0,))
    assert encrypt(b"\x0f\xf0", plain) == [b"\x0f\xf0"]


def test_m2_hand_example():
    # root = node0，node1 的父節點是 node0
    key = CipherKey(RootedTree(2, (-1, 0), 0), (0, 0), (0, 1))
    fragments = encrypt(b"\xff\x00", key)
    assert fragments == [b"\x00", b"\xff"]
    assert decrypt(fragments, key) == b"\xff\x00"


@pytest.mark.parametrize("m", [1, 2, 3, 6, 8])
def test_round_trip(m, rng):
    for _ in range(300):
        block = rng.bytes(m * 5)
        key = sample_key(m, rng)
        fragments = encrypt(block, key)
        assert len(fragments) == m
        assert {len(f) for f in fragments} == {5}
        assert decrypt(fragments, key) == block


def test_wrong_key_rarely_decrypts(rng):
    trials = 2000
    wrong = 0
    for _ in range(trials):
        block = rng.bytes(24)
        key, other = sample_key(6, rng), sample_key(6, rng)
        if other != key and decrypt(encrypt(block, key), other) != block:
            wrong += 1
    assert wrong >= 0.99 * trials


def test_encrypt_rejects_bad_length(rng):
    with pytest.raises(InvalidInputError):
        encrypt(b"abcde", sample_key(2, rng))


def test_decrypt_rejects_bad_fragments(rng):
    key = sample_key(3, rng)
    with pytest.raises(InvalidInputError):
        decrypt([b"a", b"b"], key)
    with pytest.raises(InvalidInputError):
        decrypt([b"a", b"bb", b"c"], key)


def test_invalid_trees_rejected():
    with pytest.raises(InvalidInputError):
        RootedTree(3, (-1, -1, 0), 0)
    with pytest.raises(InvalidInputError):
        # 1 與 2 互為父節點，根到不了
        RootedTree(3, (-1, 2, 1), 0)
    with pytest.raises(InvalidInputError):
        CipherKey(single_node_tree(), (2,), (0,))
    with pytest.raises(InvalidInputError):
        tree_from_prufer([0], 5)
    with pytest.raises(InvalidInputError):
        tree_from_prufer([7], 0)


def test_prufer_decoding_examples():
    # 全部同一個值 → 以它為中心的星狀樹
    assert tree_from_prufer([3, 3, 3], 3).parent == (3, 3, 3, -1, 3)
    assert tree_from_prufer([], 1).parent == (1, -1)
    # [1, 2] 是路徑 0-1-2-3
    assert tree_from_prufer([1, 2], 0).parent == (-1, 0, 1, 2)
    assert tree_from_prufer([1, 2], 0).to_prufer() == [1, 2]


def test_prufer_round_trip(rng):
    for m in range(3, 9):
        for _ in range(20):
            key = sample_key(m, rng)
            assert tree_from_prufer(key.tree.to_prufer(), key.tree.root) == key.tree


def _path_key():
    # root(0) -> a(1) -> b(2)，peer i 保存節點 i
    return CipherKey(RootedTree(3, (-1, 0, 1), 0), (0, 0, 0), (0, 1, 2))


def test_corruption_oracle_examples():
    key = _path_key()
    assert corruption_oracle(key, {0, 1, 2}, {2})
    assert not corruption_oracle(key, set(), {2})
    assert corruption_oracle(key, {0, 2}, {2})
    assert not corruption_oracle(key, {2}, {2})
    assert not corruption_oracle(key, {0, 2}, {1})
    assert corruption_oracle(key, set(), set())


def test_corruption_oracle_matches_brute_force_rewrites():
    """葉節點目標：在 {0x00, 0xFF} 碎片上窮舉被控制 peer 的所有改寫，看能否只改變目標位置。"""
    block = b"\x00\x00\x00"
    for tree in rooted_trees(3):
        key = CipherKey(tree, (0, 1, 0), (2, 0, 1))
        fragments = encrypt(block, key)
        for target in tree.leaves:
            wanted = bytearray(block)
            wanted[target] = 0xFF
            for size in range(4):
                for corrupted in itertools.combinations(range(3), size):
                    feasible = False
                    for values in itertools.product((0x00, 0xFF), repeat=size):
                        trial = list(fragments)
                        for peer, value in zip(corrupted, values):
                            trial[peer] = bytes([value ^ trial[peer][0]])
                        if decrypt(trial, key) == bytes(wanted):
                            feasible = True
                            break
                    assert feasible == corruption_oracle(key, corrupted, {target})


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 7, 8])
def test_serialize_round_trip(m, rng):
    for _ in range(100):
        key = sample_key(m, rng)
        data = serialize_key(key)
        assert len(data) == serialized_key_length(m)
        assert deserialize_key(data, m) == key


def test_serialize_m1_minimal(rng):
    key = sample_key(1, rng)
    data = serialize_key(key)
    assert len(data) == 4
    assert deserialize_key(data, 1) == key


def test_deserialize_rejects_malformed(rng):
    data = serialize_key(sample_key(4, rng))
    with pytest.raises(DecodeError):
        deserialize_key(data[:-1], 4)
    with pytest.raises(DecodeError):
        deserialize_key(b"\x05" + data[1:], 4)
    bad_assignment = data[:-4] + bytes([0, 0, 1, 2])
    with pytest.raises(DecodeError):
        deserialize_key(bad_assignment, 4)
    bad_root = data[:3] + b"\x09" + data[4:]
    with pytest.raises(DecodeError):
        deserialize_key(bad_root, 4)


def test_posterior_on_missing_fragment_m3():
    """m=3：已知明文與其中兩段碎片，剩下那段在所有金鑰下沒有任何值機率超過 1/2。"""
    block = b"\x00\xff\x0f"
    keys = list(enumerate_keys(3))
    table = [encrypt(block, key) for key in keys]
    for missing in range(3):
        groups = {}
        for fragments in table:
            seen = tuple(f for i, f in enumerate(fragments) if i != missing)
            groups.setdefault(seen, Counter())[fragments[missing]] += 1
        for counter in groups.values():
            assert max(counter.values()) / sum(counter.values()) <= 0.5
