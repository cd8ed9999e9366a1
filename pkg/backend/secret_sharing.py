"""Shamir (k, n) 秘密分享，含位元組字串的切塊分享。"""
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from backend.errors import FieldTooSmallError, InsufficientSharesError, InvalidInputError
from backend.finite_field import M61, PrimeField, lagrange_interpolate

# 每塊 7 bytes，一定小於 2^61 - 1
KEY_CHUNK_BYTES = 7
KEY_FIELD = PrimeField(M61)


@dataclass(frozen=True)
class SecretShare:
    x: int
    y: int


def _check_params(field: PrimeField, k: int, n: int):
    if not 1 <= k <= n:
        raise InvalidInputError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n >= field.modulus:
        raise FieldTooSmallError(f"n={n} shares need a field larger than {field.modulus}")


def sample_abscissas(field: PrimeField, n: int, rng: np.random.Generator) -> List[int]:
    """從 F \\ {0} 不放回地均勻抽 n 個 x。"""
    seen = set()
    xs = []
    while len(xs) < n:
        x = field.random_nonzero(rng)
        if x not in seen:
            seen.add(x)
            xs.append(x)
    return xs


def make_shares(secret: int, coefficients: Sequence[int], xs: Sequence[int],
                field: PrimeField, counters: Optional[Counter] = None) -> List[SecretShare]:
    """在每個 x 上求值一次；有給 counters 就把求值次數記到 poly_evals。"""
    poly = [field.element(secret)] + [field.element(c) for c in coefficients]
    if any(field.element(x) == 0 for x in xs):
        raise InvalidInputError("share abscissa must be nonzero")
    if len(set(xs)) != len(xs):
        raise InvalidInputError("share abscissas must be distinct")
    shares = [SecretShare(x, field.evaluate(poly, x)) for x in xs]
    if counters is not None:
        counters["poly_evals"] += len(shares)
    return shares


def split(secret: int, k: int, n: int, rng: np.random.Generator,
          field: PrimeField = KEY_FIELD, counters: Optional[Counter] = None) -> List[SecretShare]:
    _check_params(field, k, n)
    coefficients = [field.random_element(rng) for _ in range(k - 1)]
    xs = sample_abscissas(field, n, rng)
    return make_shares(secret, coefficients, xs, field, counters)


def reconstruct(shares: Sequence[SecretShare], k: int,
                field: PrimeField = KEY_FIELD) -> int:
    if len(shares) < k:
        raise InsufficientSharesError(f"need {k} shares, got {len(shares)}")
    # 多給的 share 只取前 k 個
    points = [(s.x, s.y) for s in shares[:k]]
    return lagrange_interpolate(field, points, 0)


def _chunks(secret: bytes) -> List[int]:
    return [int.from_bytes(secret[i:i + KEY_CHUNK_BYTES], "big")
            for i in range(0, len(secret), KEY_CHUNK_BYTES)]


def split_bytes(secret: bytes, k: int, n: int, rng: np.random.Generator,
                field: PrimeField = KEY_FIELD,
                counters: Optional[Counter] = None) -> List[List[SecretShare]]:
    """把 secret 切成 7-byte 的塊分別分享；回傳 n 份 share list（每位 peer 一份）。

    同一次呼叫內每位 peer 的 x 固定，各塊的係數各自獨立抽樣。
    長度不在 share 裡，呼叫端要自己以明文保存。
    """
    _check_params(field, k, n)
    if field.modulus <= 1 << (8 * KEY_CHUNK_BYTES):
        raise FieldTooSmallError("field must exceed the 7-byte chunk width")
    xs = sample_abscissas(field, n, rng)
    per_peer: List[List[SecretShare]] = [[] for _ in range(n)]
    for chunk in _chunks(secret):
        coefficients = [field.random_element(rng) for _ in range(k - 1)]
        for peer, share in enumerate(make_shares(chunk, coefficients, xs, field, counters)):
            per_peer[peer].append(share)
    return per_peer


def reconstruct_bytes(share_lists: Sequence[Sequence[SecretShare]], k: int, length: int,
                      field: PrimeField = KEY_FIELD) -> bytes:
    if len(share_lists) < k:
        raise InsufficientSharesError(f"need {k} share lists, got {len(share_lists)}")
    chosen = share_lists[:k]
    n_chunks = (length + KEY_CHUNK_BYTES - 1) // KEY_CHUNK_BYTES
    if any(len(shares) != n_chunks for shares in chosen):
        raise InvalidInputError(f"expected {n_chunks} chunk shares per peer")

    out = bytearray()
    for c in range(n_chunks):
        width = min(KEY_CHUNK_BYTES, length - c * KEY_CHUNK_BYTES)
        value = reconstruct([shares[c] for shares in chosen], k, field)
        if value >= 1 << (8 * width):
            # 份額被竄改時插值結果可能超出這塊的寬度
            raise InvalidInputError("reconstructed chunk does not fit its width")
        out += value.to_bytes(width, "big")
    return bytes(out)
