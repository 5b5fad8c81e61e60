"""Dirichlet characters with exact values.

A character value chi(a) for a unit a is stored as the integer numerator k of
the angle k/den, meaning chi(a) = exp(2*pi*i*k/den), where den is the exponent
of the unit group.  Residues sharing a factor with the modulus carry ``None``.
Complex numbers only appear in :meth:`CharacterTable.value`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import NotFundamentalDiscriminant

MAX_MODULUS = 1000


def factorize(n: int) -> list[tuple[int, int]]:
    """Trial-division factorization, ascending primes."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def _check_modulus(q: int) -> int:
    q = int(q)
    if not 1 <= q <= MAX_MODULUS:
        raise ValueError(f"modulus must be in [1, {MAX_MODULUS}], got {q}")
    return q


def _multiplicative_order(g: int, n: int) -> int:
    k, x = 1, g % n
    while x != 1:
        x = x * g % n
        k += 1
    return k


def _primitive_root_prime_power(p: int, e: int) -> int:
    pe = p**e
    phi = pe - pe // p
    for g in range(2, pe):
        if math.gcd(g, p) == 1 and _multiplicative_order(g, pe) == phi:
            return g
    raise AssertionError("unreachable for odd prime powers")


def _crt_lift(residue: int, modulus: int, q: int) -> int:
    """Element of Z/q that is `residue` mod `modulus` and 1 modulo the cofactor."""
    other = q // modulus
    if other == 1:
        return residue % q
    # x = residue (mod modulus), x = 1 (mod other)
    inv = pow(modulus, -1, other)
    x = residue + modulus * ((1 - residue) * inv % other)
    return x % q


@lru_cache(maxsize=None)
def unit_group_structure(q: int) -> tuple[tuple[int, int], ...]:
    """Generators of (Z/qZ)* with their orders, one cyclic factor each.

    Odd prime powers contribute a primitive root; 4 contributes -1; 2^e with
    e >= 3 contributes -1 (order 2) and 5 (order 2^(e-2)).  Each generator is
    lifted to Z/q by the Chinese remainder theorem.
    """
    q = _check_modulus(q)
    gens: list[tuple[int, int]] = []
    for p, e in factorize(q):
        pe = p**e
        if p == 2:
            if e == 2:
                gens.append((_crt_lift(3, 4, q), 2))
            elif e >= 3:
                gens.append((_crt_lift(pe - 1, pe, q), 2))
                gens.append((_crt_lift(5, pe, q), pe // 4))
        else:
            g = _primitive_root_prime_power(p, e)
            gens.append((_crt_lift(g, pe, q), pe - pe // p))
    return tuple(gens)


@lru_cache(maxsize=None)
def _discrete_logs(q: int) -> dict[int, tuple[int, ...]]:
    """Map each unit to its exponent vector with respect to unit_group_structure(q)."""
    gens = unit_group_structure(q)
    logs: dict[int, tuple[int, ...]] = {}
    for exps in product(*(range(order) for _, order in gens)):
        x = 1 % q
        for (g, _), k in zip(gens, exps):
            x = x * pow(g, k, q) % q
        logs[x] = exps
    if q == 1:
        logs = {0: ()}
    return logs


@dataclass(frozen=True)
class CharacterTable:
    modulus: int
    numerators: tuple[int | None, ...]
    den: int
    is_principal: bool
    index: int

    def angle(self, a: int):
        """Exact angle as (numerator, den), or None off the units."""
        k = self.numerators[a % self.modulus]
        return None if k is None else (k, self.den)

    def value(self, a: int) -> complex:
        k = self.numerators[a % self.modulus]
        if k is None:
            return 0j
        return _root_of_unity(k, self.den)

    def values(self) -> np.ndarray:
        return np.array([self.value(a) for a in range(self.modulus)], dtype=complex)

    def is_real(self) -> bool:
        return all(k is None or (2 * k) % self.den == 0 for k in self.numerators)

    def __call__(self, a: int) -> complex:
        return self.value(a)


def _root_of_unity(k: int, den: int) -> complex:
    k %= den
    # exact values on the axes
    if 4 * k % den == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[4 * k // den]
    return cmath.exp(2j * math.pi * k / den)


@lru_cache(maxsize=None)
def enumerate_characters(q: int) -> tuple[CharacterTable, ...]:
    """All phi(q) characters mod q; index 0 is the principal character.

    A character is fixed by exponents (j_1, ..., j_r) with chi(g_i) =
    exp(2*pi*i*j_i/ord_i); the index is the mixed-radix number formed by the
    j_i with j_1 most significant.
    """
    q = _check_modulus(q)
    gens = unit_group_structure(q)
    orders = [o for _, o in gens]
    den = math.lcm(*orders) if orders else 1
    logs = _discrete_logs(q)
    tables = []
    for index, js in enumerate(product(*(range(o) for o in orders))):
        nums: list[int | None] = [None] * q
        for a, exps in logs.items():
            nums[a] = sum(j * e * (den // o) for j, e, o in zip(js, exps, orders)) % den
        tables.append(
            CharacterTable(q, tuple(nums), den, all(j == 0 for j in js), index)
        )
    return tuple(tables)


def principal_character(q: int) -> CharacterTable:
    return enumerate_characters(q)[0]


def character(q: int, index: int) -> CharacterTable:
    chars = enumerate_characters(q)
    if not 0 <= index < len(chars):
        raise ValueError(f"character index must be in [0, {len(chars)}), got {index}")
    return chars[index]


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 0."""
    if n < 0:
        raise ValueError("kronecker_symbol expects n >= 0")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    # factor 2 out of n
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 == 1 and d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d/n) for odd n > 0
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(abs(n)))


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


@lru_cache(maxsize=None)
def character_from_discriminant(d: int) -> CharacterTable:
    """The real character a -> (d/a) modulo |d| for a fundamental discriminant d."""
    if not is_fundamental_discriminant(d):
        raise NotFundamentalDiscriminant(f"{d} is not a fundamental discriminant")
    q = _check_modulus(abs(d))
    signs = [kronecker_symbol(d, a) for a in range(q)]
    for chi in enumerate_characters(q):
        if all(
            (s == 0 and k is None) or (k is not None and _root_of_unity(k, chi.den) == s)
            for s, k in zip(signs, chi.numerators)
        ):
            return chi
    raise AssertionError(f"no character mod {q} matches kronecker symbol of {d}")
