"""Rooted-tree XOR cipher for one zone.

金鑰 = 均勻隨機的有根標記樹 + 每個節點一個翻轉位元 + peer→節點 的指派。
區塊依位置切成 m 段，非根節點存 B_i ⊕ B_parent，根節點存其他碼字的
XOR 再 ⊕ B_root，翻轉位元為 1 時整段取補數。

序列化格式（固定順序，全部 1 byte 一格）::

    [m] [prufer_0 .. prufer_{m-3}] [root] [flips, np.packbits 補到整 byte] [assignment_0 .. assignment_{m-1}]
"""
import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from backend.errors import ConfigurationError, DecodeError, InvalidInputError

MAX_ZONE_SIZE = 255


@dataclass(frozen=True)
class RootedTree:
    m: int
    parent: Tuple[int, ...]
    root: int

    def __post_init__(self):
        if len(self.parent) != self.m or not 0 <= self.root < self.m:
            raise InvalidInputError("parent array does not match node count")
        roots = [i for i, p in enumerate(self.parent) if p == -1]
        if roots != [self.root]:
            raise InvalidInputError("tree must have exactly one root")
        if len(self.order) != self.m:
            raise InvalidInputError("parent pointers do not reach every node from the root")

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in range(self.m)]
        for node, p in enumerate(self.parent):
            if 0 <= p < self.m:
                kids[p].append(node)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def order(self) -> Tuple[int, ...]:
        """BFS 順序（父節點一定在子節點之前）。"""
        seen = [self.root]
        queue = deque([self.root])
        visited = {self.root}
        while queue:
            node = queue.popleft()
            for child in self.children[node]:
                if child in visited:
                    continue
                visited.add(child)
                seen.append(child)
                queue.append(child)
        return tuple(seen)

    def subtree(self, node: int) -> Set[int]:
        nodes = {node}
        stack = [node]
        while stack:
            for child in self.children[stack.pop()]:
                nodes.add(child)
                stack.append(child)
        return nodes

    @property
    def leaves(self) -> List[int]:
        return [i for i in range(self.m) if not self.children[i] and i != self.root]

    def to_prufer(self) -> List[int]:
        if self.m <= 2:
            return []
        graph = nx.Graph()
        graph.add_nodes_from(range(self.m))
        graph.add_edges_from((i, p) for i, p in enumerate(self.parent) if p >= 0)
        return list(nx.to_prufer_sequence(graph))


@dataclass(frozen=True)
class CipherKey:
    tree: RootedTree
    flips: Tuple[int, ...]
    # assignment[peer] = 這位 peer 保存的節點 θ_i
    assignment: Tuple[int, ...]

    def __post_init__(self):
        m = self.tree.m
        if len(self.flips) != m or any(b not in (0, 1) for b in self.flips):
            raise InvalidInputError(f"flips must be {m} bits")
        if sorted(self.assignment) != list(range(m)):
            raise InvalidInputError("assignment must be a permutation of the nodes")

    @property
    def m(self) -> int:
        return self.tree.m

    @cached_property
    def holder(self) -> Tuple[int, ...]:
        """holder[node] = 保存該節點碼字的 peer（θ̃）。"""
        inverse = [0] * self.m
        for peer, node in enumerate(self.assignment):
            inverse[node] = peer
        return tuple(inverse)


def tree_from_prufer(sequence: Sequence[int], root: int) -> RootedTree:
    m = len(sequence) + 2
    if not 0 <= root < m:
        raise InvalidInputError(f"root {root} out of range for {m} nodes")
    try:
        graph = nx.from_prufer_sequence(list(sequence))
    except nx.NetworkXError as e:
        raise InvalidInputError(f"invalid Prüfer sequence: {e}") from e

    # 從 root 出發把無向樹定向
    parent = [-1] * m
    for u, v in nx.bfs_edges(graph, root):
        parent[v] = u
    return RootedTree(m, tuple(parent), root)


def single_node_tree() -> RootedTree:
    return RootedTree(1, (-1,), 0)


def sample_key(m: int, rng: np.random.Generator) -> CipherKey:
    if m < 1:
        raise InvalidInputError("zone size m must be >= 1")
    if m > MAX_ZONE_SIZE:
        raise ConfigurationError(f"zone size {m} exceeds {MAX_ZONE_SIZE}")
    if m == 1:
        tree = single_node_tree()
    else:
        sequence = [int(v) for v in rng.integers(0, m, size=m - 2)]
        tree = tree_from_prufer(sequence, int(rng.integers(0, m)))
    flips = tuple(int(b) for b in rng.integers(0, 2, size=m))
    assignment = tuple(int(v) for v in rng.permutation(m))
    return CipherKey(tree, flips, assignment)


def rooted_trees(m: int) -> Iterator[RootedTree]:
    """列舉所有 m^(m-1) 棵有根標記樹。"""
    if m == 1:
        yield single_node_tree()
        return
    for sequence in itertools.product(range(m), repeat=m - 2):
        for root in range(m):
            yield tree_from_prufer(sequence, root)


def enumerate_keys(m: int) -> Iterator[CipherKey]:
    trees = list(rooted_trees(m))
    for tree in trees:
        for flips in itertools.product((0, 1), repeat=m):
            for assignment in itertools.permutations(range(m)):
                yield CipherKey(tree, flips, assignment)


def key_space_size(m: int) -> int:
    return m ** (m - 1) * 2 ** m * math.factorial(m)


def key_entropy_bits(m: int) -> float:
    """log2 |K|：樹 (m-1)log2 m + 翻轉 m + 指派 log2 m!。"""
    return (m - 1) * math.log2(m) + m + math.log2(math.factorial(m))


def _split_block(block: bytes, m: int) -> np.ndarray:
    if m < 1 or len(block) % m != 0:
        raise InvalidInputError(f"block length {len(block)} is not divisible by m={m}")
    return np.frombuffer(block, dtype=np.uint8).reshape(m, len(block) // m)


def encrypt(block: bytes, key: CipherKey) -> List[bytes]:
    tree = key.tree
    plain = _split_block(block, key.m)
    codes = np.empty_like(plain)

    for node in range(key.m):
        if node == tree.root:
            continue
        codes[node] = plain[node] ^ plain[tree.parent[node]]
        if key.flips[node]:
            codes[node] = ~codes[node]

    root_code = plain[tree.root].copy()
    for node in range(key.m):
        if node != tree.root:
            root_code ^= codes[node]
    if key.flips[tree.root]:
        root_code = ~root_code
    codes[tree.root] = root_code

    return [codes[node].tobytes() for node in key.assignment]


def decrypt(fragments: Sequence[bytes], key: CipherKey) -> bytes:
    if len(fragments) != key.m:
        raise InvalidInputError(f"expected {key.m} fragments, got {len(fragments)}")
    if len({len(f) for f in fragments}) > 1:
        raise InvalidInputError("fragments must have equal length")

    tree = key.tree
    width = len(fragments[0])
    codes = np.empty((key.m, width), dtype=np.uint8)
    for peer, node in enumerate(key.assignment):
        codes[node] = np.frombuffer(fragments[peer], dtype=np.uint8)

    plain = np.empty_like(codes)
    root_value = ~codes[tree.root] if key.flips[tree.root] else codes[tree.root].copy()
    for node in range(key.m):
        if node != tree.root:
            root_value ^= codes[node]
    plain[tree.root] = root_value

    for node in tree.order[1:]:
        code = ~codes[node] if key.flips[node] else codes[node]
        plain[node] = code ^ plain[tree.parent[node]]
    return plain.tobytes()


def corruption_oracle(key: CipherKey, corrupted_peers: Iterable[int],
                      target_change: Iterable[int]) -> bool:
    """改寫 target_change 內節點的明文時，需要重寫的碼字是否全落在被控制的 peer 上。

    需要重寫的節點 = 每個目標節點的子樹 ∪ 根。
    """
    targets = set(target_change)
    if not targets:
        return True
    corrupted = set(corrupted_peers)
    required = {key.tree.root}
    for node in targets:
        required |= key.tree.subtree(node)
    return all(key.holder[node] in corrupted for node in required)


def serialize_key(key: CipherKey) -> bytes:
    m = key.m
    if m > MAX_ZONE_SIZE:
        raise ConfigurationError(f"zone size {m} exceeds {MAX_ZONE_SIZE}")
    flips = np.packbits(np.array(key.flips, dtype=np.uint8)).tobytes()
    return (bytes([m]) + bytes(key.tree.to_prufer()) + bytes([key.tree.root])
            + flips + bytes(key.assignment))


def serialized_key_length(m: int) -> int:
    return 1 + max(m - 2, 0) + 1 + (m + 7) // 8 + m


def deserialize_key(data: bytes, m: int) -> CipherKey:
    if len(data) != serialized_key_length(m):
        raise DecodeError(f"key for m={m} must be {serialized_key_length(m)} bytes, got {len(data)}")
    if data[0] != m:
        raise DecodeError(f"key header says m={data[0]}, expected {m}")

    pos = 1
    sequence = list(data[pos:pos + max(m - 2, 0)])
    pos += max(m - 2, 0)
    root = data[pos]
    pos += 1
    n_flip_bytes = (m + 7) // 8
    packed = np.frombuffer(data[pos:pos + n_flip_bytes], dtype=np.uint8)
    pos += n_flip_bytes
    assignment = tuple(data[pos:pos + m])

    bits = np.unpackbits(packed)
    if bits[m:].any():
        raise DecodeError("non-canonical flip padding")
    if root >= m or any(v >= m for v in sequence):
        raise DecodeError("tree field out of range")
    try:
        tree = single_node_tree() if m == 1 else tree_from_prufer(sequence, root)
        return CipherKey(tree, tuple(int(b) for b in bits[:m]), assignment)
    except InvalidInputError as e:
        raise DecodeError(str(e)) from e
