"""Exact integer machinery for Diophantine sampling.

All arithmetic uses Python integers, so rates and lag indices never
overflow regardless of size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import DomainError, NoZeroSumSolutionError, NotCoprimeError


def gcd(a: int, b: int) -> int:
    """Greatest common divisor of two integers, not both zero."""
    if a == 0 and b == 0:
        raise DomainError("gcd(0, 0) is undefined")
    return math.gcd(a, b)


@dataclass(frozen=True)
class BezoutPair:
    """Positive pair with ``alpha * M1 - beta * M2 == 1``."""

    alpha: int
    beta: int
    m1: int
    m2: int

    def check(self) -> bool:
        return self.alpha * self.m1 - self.beta * self.m2 == 1


def bezout_coprime_pair(m1: int, m2: int) -> BezoutPair:
    """Return ``alpha = M1^{-1} mod M2`` and ``beta = (alpha*M1 - 1) / M2``.

    Raises:
        NotCoprimeError: if ``gcd(M1, M2) != 1``.
        DomainError: if either rate is below 2.
    """
    if m1 < 2 or m2 < 2:
        raise DomainError(f"rates must be >= 2, got ({m1}, {m2})")
    if math.gcd(m1, m2) != 1:
        raise NotCoprimeError(f"gcd({m1}, {m2}) = {math.gcd(m1, m2)} != 1")
    alpha = pow(m1, -1, m2)
    beta = (alpha * m1 - 1) // m2
    return BezoutPair(alpha, beta, m1, m2)


@dataclass(frozen=True)
class DioSolution3:
    """Zero-sum coefficient pair for a sampler triple.

    ``a . rates == 0`` and ``b . rates == 1`` with ``sum(a) == sum(b) == 0``.
    The index holding the negative entry of ``a`` (and of ``b``) marks the
    sampler whose samples enter the estimator conjugated.
    """

    rates: tuple[int, int, int]
    a: tuple[int, int, int]
    b: tuple[int, int, int]

    @property
    def negative_index(self) -> int:
        return next(i for i, ai in enumerate(self.a) if ai < 0)

    @property
    def signs(self) -> tuple[int, int, int]:
        neg = self.negative_index
        return tuple(-1 if i == neg else 1 for i in range(3))

    def check(self) -> bool:
        dot_a = sum(x * m for x, m in zip(self.a, self.rates))
        dot_b = sum(x * m for x, m in zip(self.b, self.rates))
        negs_a = [i for i, x in enumerate(self.a) if x < 0]
        negs_b = [i for i, x in enumerate(self.b) if x < 0]
        return (
            dot_a == 0
            and dot_b == 1
            and sum(self.a) == 0
            and sum(self.b) == 0
            and len(negs_a) == 1
            and negs_a == negs_b
        )

    def to_dict(self) -> dict:
        return {"rates": list(self.rates), "a": list(self.a), "b": list(self.b)}


def solve_dio3_zero_sum(m1: int, m2: int, m3: int) -> DioSolution3:
    """Canonical zero-sum solution for three sampling rates.

    The rates are sorted descending, ``hi > mid > lo``; the middle rate gets
    the negative coefficients. Because the coefficients sum to zero, adding a
    common offset to every rate leaves the solution unchanged.

    Raises:
        DomainError: duplicate or non-positive rates.
        NoZeroSumSolutionError: ``gcd(hi - mid, mid - lo) != 1``.
    """
    rates = (m1, m2, m3)
    if min(rates) < 1:
        raise DomainError(f"rates must be positive, got {rates}")
    if len(set(rates)) != 3:
        raise DomainError(f"rates must be pairwise distinct, got {rates}")
    order = sorted(range(3), key=lambda i: -rates[i])
    hi, mid, lo = (rates[i] for i in order)
    up, down = hi - mid, mid - lo
    if math.gcd(up, down) != 1:
        raise NoZeroSumSolutionError(
            f"gcd({up}, {down}) = {math.gcd(up, down)} for rates {rates}"
        )
    a_sorted = (down, -(hi - lo), up)
    # smallest positive b_hi with b_hi * up == 1 (mod down); mod 1 gives 0 -> use 1
    b_hi = pow(up, -1, down) if down > 1 else 1
    b_lo = (b_hi * up - 1) // down
    b_sorted = (b_hi, -b_hi - b_lo, b_lo)
    a = [0, 0, 0]
    b = [0, 0, 0]
    for slot, idx in enumerate(order):
        a[idx] = a_sorted[slot]
        b[idx] = b_sorted[slot]
    return DioSolution3(rates, tuple(a), tuple(b))


def lag_solution(sol: DioSolution3, k: int, l: int) -> tuple[int, int, int]:
    """Signed sampling indices ``m = k*b + l*a`` with ``m . rates == k``.

    ``k = 0`` is accepted (it yields the zero-lag tuples used for ``v[0]``).
    """
    if k < 0 or l < 1:
        raise DomainError(f"need k >= 0 and l >= 1, got k={k}, l={l}")
    return tuple(k * bi + l * ai for ai, bi in zip(sol.a, sol.b))


@dataclass(frozen=True)
class TripleCatalog:
    n: int
    gamma: int
    triples: tuple[tuple[tuple[int, int, int], DioSolution3], ...]

    @property
    def rates(self) -> tuple[int, ...]:
        return tuple(i + self.gamma for i in range(1, self.n + 1))

    def __len__(self) -> int:
        return len(self.triples)

    @staticmethod
    def guaranteed_floor(n: int) -> int:
        """``floor(n(n-1)(n-2) / pi^2)``, the guaranteed minimum triple count."""
        return math.floor(n * (n - 1) * (n - 2) / math.pi**2)


def coprime_triples(n: int, gamma: int = 0) -> TripleCatalog:
    """All index triples of ``M_i = i + gamma`` admitting a zero-sum solution.

    Indices are 1-based. The gcd of the two differences about the middle rate
    does not depend on which element is taken as the middle, so a single test
    per unordered triple suffices.
    """
    if n < 3:
        raise DomainError(f"need n >= 3 samplers, got {n}")
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    found = []
    for i1, i2, i3 in combinations(range(1, n + 1), 3):
        if math.gcd(i2 - i1, i3 - i2) != 1:
            continue
        sol = solve_dio3_zero_sum(i1 + gamma, i2 + gamma, i3 + gamma)
        found.append(((i1, i2, i3), sol))
    return TripleCatalog(n, gamma, tuple(found))


def triple_count_bounds(n: int, n_even: int) -> tuple[int, Fraction]:
    """``C(n,3) - C(n_even,3) - C(n-n_even,3)`` next to ``n(n-1)(n-2)/8``.

    Informational: the first value can exceed the second for small or
    balanced parities, so no ordering between them is asserted.
    """
    if not 0 <= n_even <= n:
        raise DomainError(f"need 0 <= n_even <= n, got n={n}, n_even={n_even}")
    left = math.comb(n, 3) - math.comb(n_even, 3) - math.comb(n - n_even, 3)
    return left, Fraction(n * (n - 1) * (n - 2), 8)
