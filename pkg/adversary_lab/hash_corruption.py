"""攻擊 (m, m) 分享的 hash：攻擊者握有 c 份 share，想讓重建結果變成 H′。

誠實 peer 的 x 對攻擊者未知，只能從剩下的 q−1−c 個非零值裡猜。猜中 x_g 後
它把自己的 share 加上 D(x) = (H′−H)·∏(1 − x/x_g)；D 在猜的點上為 0，
所以只有全部猜中時重建才會等於 H′。
"""
import itertools
import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from sympy import prevprime

from backend.errors import InvalidInputError
from backend.finite_field import PrimeField
from backend.secret_sharing import SecretShare, make_shares, reconstruct, split
from adversary_lab.trials import TrialSummary


def field_for_bits(field_bits: int) -> PrimeField:
    """小於 2^field_bits 的最大質數。"""
    if field_bits < 2:
        raise InvalidInputError("field_bits must be >= 2")
    return PrimeField(int(prevprime(2 ** field_bits)))


def _forge(field: PrimeField, own: Sequence[SecretShare], guesses: Sequence[int],
           secret: int, target: int) -> List[SecretShare]:
    delta = field.sub(target, secret)
    forged = []
    for share in own:
        d = delta
        for g in guesses:
            d = field.mul(d, field.sub(1, field.mul(share.x, field.inv(g))))
        forged.append(SecretShare(share.x, field.add(share.y, d)))
    return forged


def _sample_excluding(field: PrimeField, count: int, taken: set, rng: np.random.Generator) -> List[int]:
    out: List[int] = []
    while len(out) < count:
        x = field.random_nonzero(rng)
        if x not in taken and x not in out:
            out.append(x)
    return out


def hash_corruption_trial(m: int, field_bits: int, trials: int, rng: np.random.Generator,
                          corrupted: Optional[int] = None, seed: Optional[int] = None) -> TrialSummary:
    if m < 2:
        raise InvalidInputError("m must be >= 2")
    corrupted = m - 1 if corrupted is None else corrupted
    if not 0 <= corrupted <= m:
        raise InvalidInputError(f"corrupted={corrupted} outside [0, {m}]")
    field = field_for_bits(field_bits)
    honest = m - corrupted
    candidates = field.modulus - 1 - corrupted
    bound = 1.0 if honest == 0 else 1 / math.comb(candidates, honest)

    successes = 0
    for _ in range(trials):
        if honest == 0:
            # 全部 share 都在手上，直接重新分享 H′
            successes += 1
            continue
        secret = field.random_element(rng)
        target = field.add(secret, field.random_nonzero(rng))
        shares = split(secret, m, m, rng, field=field)
        own, rest = shares[:corrupted], shares[corrupted:]
        guesses = _sample_excluding(field, honest, {s.x for s in own}, rng)
        forged = _forge(field, own, guesses, secret, target)
        if reconstruct(forged + rest, m, field=field) == target:
            successes += 1

    return TrialSummary("hash_corruption", trials, successes, bound, seed,
                        extra={"m": m, "field_bits": field_bits, "modulus": field.modulus,
                               "corrupted": corrupted})


def hash_corruption_exact(m: int, field_bits: int, rng: np.random.Generator) -> Fraction:
    """c = m−1 時對誠實 x 與攻擊者猜測做窮舉，實際重建後算成功比例。"""
    if m < 2:
        raise InvalidInputError("m must be >= 2")
    field = field_for_bits(field_bits)
    secret = field.random_element(rng)
    target = field.add(secret, field.random_nonzero(rng))
    coefficients = [field.random_element(rng) for _ in range(m - 1)]
    own_xs = list(range(1, m))
    own = make_shares(secret, coefficients, own_xs, field)
    open_xs = [x for x in range(1, field.modulus) if x not in own_xs]

    wins = 0
    for x_honest, x_guess in itertools.product(open_xs, repeat=2):
        honest_share = make_shares(secret, coefficients, [x_honest], field)
        forged = _forge(field, own, [x_guess], secret, target)
        if reconstruct(forged + honest_share, m, field=field) == target:
            wins += 1
    return Fraction(wins, len(open_xs) ** 2)
