"""質數體 GF(p) 的四則運算與 Lagrange 插值。

元素一律以 Python int 表示（值域 [0, p)），體本身只存 modulus，
因此 61-bit 以上的乘法也不會溢位。
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from sympy import isprime

from backend.errors import ConfigurationError, InvalidInputError

# Mersenne prime 2^61 - 1，用來切塊分享序列化後的金鑰
M61 = (1 << 61) - 1

Point = Tuple[int, int]


@dataclass(frozen=True)
class PrimeField:
    modulus: int

    def __post_init__(self):
        if self.modulus < 2 or not isprime(self.modulus):
            raise ConfigurationError(f"modulus {self.modulus} is not a prime >= 2")

    @property
    def byte_width(self) -> int:
        return (self.modulus.bit_length() + 7) // 8

    def element(self, value: int) -> int:
        return value % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def neg(self, a: int) -> int:
        return (-a) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def inv(self, a: int) -> int:
        if a % self.modulus == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.modulus})")
        return pow(a, -1, self.modulus)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def random_element(self, rng: np.random.Generator) -> int:
        """Uniform element via byte rejection sampling (works above 2^63)."""
        nbits = self.modulus.bit_length()
        nbytes = (nbits + 7) // 8
        mask = (1 << nbits) - 1
        while True:
            value = int.from_bytes(rng.bytes(nbytes), "big") & mask
            if value < self.modulus:
                return value

    def random_nonzero(self, rng: np.random.Generator) -> int:
        while True:
            value = self.random_element(rng)
            if value != 0:
                return value

    def evaluate(self, coefficients: Sequence[int], x: int) -> int:
        """Horner 法求值，coefficients 由低次到高次 [a_0, a_1, ...]。"""
        result = 0
        for c in reversed(coefficients):
            result = (result * x + c) % self.modulus
        return result


def field_new(modulus: int) -> PrimeField:
    return PrimeField(modulus)


def lagrange_interpolate(field: PrimeField, points: Sequence[Point], x0: int) -> int:
    """回傳通過所有 points 的唯一多項式在 x0 的值。"""
    if not points:
        raise InvalidInputError("at least one point is required")
    xs: List[int] = [field.element(x) for x, _ in points]
    if len(set(xs)) != len(xs):
        raise InvalidInputError("interpolation points must have distinct x")

    p = field.modulus
    x0 = field.element(x0)
    result = 0
    for i, (xi, (_, yi)) in enumerate(zip(xs, points)):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            num = num * (x0 - xj) % p
            den = den * (xi - xj) % p
        result = (result + yi * num * pow(den, -1, p)) % p
    return result
