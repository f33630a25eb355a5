"""Temporal sampling planners with exact delay accounting.

Indices are sample numbers of each sampler: index ``n`` of a sampler with
undersampling rate ``M`` is taken at time ``n*M*T_s``. Delays are reported in
Nyquist ticks (units of ``T_s``) and stay integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, NotCoprimeError, ResourceLimitError
from .numtheory import DioSolution3, coprime_triples, solve_dio3_zero_sum

#: Upper bound on tuples a plan will materialize into ``lag_map``.
MAX_LAG_MAP_TUPLES = 5_000_000


@dataclass(frozen=True)
class TupleGroup:
    """Samplers sharing one index rule; ``signs[j] = -1`` marks a conjugated sample."""

    samplers: tuple[int, ...]
    signs: tuple[int, ...]
    sol: DioSolution3 | None = None


class SamplingPlan:
    """Per-sampler sampling indices and the index tuples realizing each lag.

    Subclasses supply :meth:`tuples`; everything else is derived from it.
    """

    kind = "plan"

    def __init__(self, rates: Sequence[int], K: int, L: int, groups: Sequence[TupleGroup]):
        if K < 0 or L < 1:
            raise DomainError(f"need K >= 0 and L >= 1, got K={K}, L={L}")
        self.rates = tuple(int(r) for r in rates)
        self.K = int(K)
        self.L = int(L)
        self.groups = tuple(groups)

    def tuples(self, k: int, group: int = 0) -> np.ndarray:
        """``(L, width)`` array of nonnegative indices realizing lag ``k``."""
        raise NotImplementedError

    def lag_of(self, row: Sequence[int], group: int = 0) -> int:
        g = self.groups[group]
        return sum(s * int(n) * self.rates[i] for s, n, i in zip(g.signs, row, g.samplers))

    @property
    def tuple_count(self) -> int:
        return (self.K + 1) * self.L * len(self.groups)

    @property
    def virtual_snapshots_per_lag(self) -> int:
        """Tuples per lag, counted per group before any deduplication."""
        return self.L * len(self.groups)

    @cached_property
    def virtual_snapshots_per_lag_dedup(self) -> int:
        """Distinct ``(sampler, index)`` tuples for the largest lag."""
        seen = set()
        for g, grp in enumerate(self.groups):
            for row in self.tuples(self.K, g).tolist():
                seen.add(tuple(zip(grp.samplers, row)))
        return len(seen)

    @cached_property
    def instants(self) -> tuple[np.ndarray, ...]:
        """Sorted distinct sample indices per sampler."""
        self._check_materializable()
        per = [[] for _ in self.rates]
        for g, grp in enumerate(self.groups):
            rows = np.concatenate([self.tuples(k, g) for k in range(self.K + 1)])
            for col, s in enumerate(grp.samplers):
                per[s].append(rows[:, col])
        return tuple(np.unique(np.concatenate(p)) if p else np.zeros(0, dtype=np.int64)
                     for p in per)

    @property
    def physical_samples(self) -> int:
        return int(sum(x.size for x in self.instants))

    @cached_property
    def delay_ticks(self) -> int:
        return max(int(x[-1]) * m for x, m in zip(self.instants, self.rates) if x.size)

    @cached_property
    def stream_lengths(self) -> tuple[int, ...]:
        """Samples each sampler must record: largest used index plus one."""
        return tuple(int(x[-1]) + 1 if x.size else 0 for x in self.instants)

    def delay_seconds(self, ts: float) -> float:
        return self.delay_ticks * ts

    def _check_materializable(self) -> None:
        if self.tuple_count > MAX_LAG_MAP_TUPLES:
            raise ResourceLimitError(
                f"plan has {self.tuple_count} tuples (limit {MAX_LAG_MAP_TUPLES})",
                advisory="reduce K, L or the number of samplers",
            )

    def lag_map(self) -> dict[int, list[list[int]]]:
        self._check_materializable()
        out = {}
        for k in range(self.K + 1):
            rows = []
            for g, grp in enumerate(self.groups):
                t = self.tuples(k, g).tolist()
                if len(self.groups) > 1:
                    ids = [s + 1 for s in grp.samplers]
                    t = [ids + r for r in t]
                rows.extend(t)
            out[k] = rows
        return out

    def summary(self) -> dict:
        try:
            physical = self.physical_samples
        except ResourceLimitError:
            physical = None
        return {
            "kind": self.kind,
            "rates": list(self.rates),
            "K": self.K,
            "L": self.L,
            "delay_ticks": self.delay_ticks,
            "physical_samples": physical,
            "virtual_snapshots_per_lag": self.virtual_snapshots_per_lag,
            "virtual_snapshots_per_lag_dedup": self.virtual_snapshots_per_lag_dedup,
        }

    def to_dict(self, include_lag_map: bool = True) -> dict:
        out = self.summary()
        out["groups"] = [
            {
                "samplers": [s + 1 for s in g.samplers],
                "signs": list(g.signs),
                **({"a": list(g.sol.a), "b": list(g.sol.b)} if g.sol else {}),
            }
            for g in self.groups
        ]
        out["instants"] = [x.tolist() for x in self.instants]
        if include_lag_map:
            out["lag_map"] = {str(k): v for k, v in self.lag_map().items()}
        return out


class DiophantinePlan(SamplingPlan):
    """Plan built from zero-sum triple solutions: ``m = k*b + l*a``."""

    kind = "diophantine"

    def tuples(self, k: int, group: int = 0) -> np.ndarray:
        if not 0 <= k <= self.K:
            raise DomainError(f"lag {k} outside [0, {self.K}]")
        sol = self.groups[group].sol
        ell = np.arange(1, self.L + 1, dtype=np.int64)[:, None]
        m = k * np.asarray(sol.b, dtype=np.int64) + ell * np.asarray(sol.a, dtype=np.int64)
        return np.abs(m)

    @cached_property
    def stream_lengths(self) -> tuple[int, ...]:
        need = [0] * len(self.rates)
        for g in self.groups:
            for s, ai, bi in zip(g.samplers, g.sol.a, g.sol.b):
                need[s] = max(need[s], self.K * abs(bi) + self.L * abs(ai) + 1)
        return tuple(need)

    @cached_property
    def delay_ticks(self) -> int:
        # a_s and b_s never have opposite signs, so |k b_s + l a_s| peaks at (K, L)
        best = 0
        for g in self.groups:
            for s, ai, bi in zip(g.samplers, g.sol.a, g.sol.b):
                best = max(best, (self.K * abs(bi) + self.L * abs(ai)) * self.rates[s])
        return best


class ThreeSamplerPlan(DiophantinePlan):
    kind = "three"

    def delay_bound(self) -> int:
        """``(2K + 3L)(5 + gamma)`` ticks."""
        return (2 * self.K + 3 * self.L) * self.rates[2]


class NSamplerPlan(DiophantinePlan):
    kind = "n"

    def __init__(self, rates, K, L, groups, n: int, gamma: int):
        super().__init__(rates, K, L, groups)
        self.n = n
        self.gamma = gamma

    def delay_bound(self) -> int:
        """``2(n-1)(K+L)(n+gamma)`` ticks."""
        return 2 * (self.n - 1) * (self.K + self.L) * (self.n + self.gamma)

    def snapshot_floor(self) -> int:
        """``floor(L n(n-1)(n-2) / pi^2)``."""
        n = self.n
        return math.floor(self.L * n * (n - 1) * (n - 2) / math.pi**2)

    @cached_property
    def virtual_snapshots_per_lag_dedup(self) -> int:
        # distinct sampler triples and a != 0 make every (k, l, triple) tuple unique
        return self.virtual_snapshots_per_lag


def three_sampler_plan(gamma: int, K: int, L: int) -> ThreeSamplerPlan:
    """Rates ``(2, 3, 5) + gamma``; lag ``k`` uses indices ``(k+2l, 2k+3l, k+l)``."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if K < 1 or L < 1:
        raise DomainError(f"need K, L >= 1, got K={K}, L={L}")
    sol = solve_dio3_zero_sum(2 + gamma, 3 + gamma, 5 + gamma)
    group = TupleGroup((0, 1, 2), sol.signs, sol)
    return ThreeSamplerPlan(sol.rates, K, L, [group])


def n_sampler_plan(n: int, gamma: int, K: int, L: int) -> NSamplerPlan:
    """Distributed plan over every admissible triple of ``M_i = i + gamma``."""
    if K < 1 or L < 1:
        raise DomainError(f"need K, L >= 1, got K={K}, L={L}")
    catalog = coprime_triples(n, gamma)
    groups = [TupleGroup(tuple(i - 1 for i in idx), sol.signs, sol)
              for idx, sol in catalog.triples]
    return NSamplerPlan(catalog.rates, K, L, groups, n=n, gamma=gamma)


class CoprimePlan(SamplingPlan):
    """Two-sampler plan: window ``r`` holds ``m1 in [r M2, (r+2) M2)``, ``m2 in [r M1, (r+1) M1)``."""

    kind = "coprime"

    def __init__(self, m1: int, m2: int, K: int, L: int):
        super().__init__((m1, m2), K, L, [TupleGroup((0, 1), (1, -1))])
        self._inv = pow(m2, -1, m1)

    def _offsets(self, k: int) -> tuple[int, int]:
        m1, m2 = self.rates
        j = (-k * self._inv) % m1
        return (k + j * m2) // m1, j

    def tuples(self, k: int, group: int = 0) -> np.ndarray:
        if not 0 <= k <= self.K:
            raise DomainError(f"lag {k} outside [0, {self.K}]")
        m1, m2 = self.rates
        d1, d2 = self._offsets(k)
        r = np.arange(self.L, dtype=np.int64)
        return np.stack([r * m2 + d1, r * m1 + d2], axis=1)

    @cached_property
    def delay_ticks(self) -> int:
        m1, m2 = self.rates
        best1 = max(self._offsets(k)[0] for k in range(self.K + 1))
        best2 = max(self._offsets(k)[1] for k in range(self.K + 1))
        r = self.L - 1
        return max((r * m2 + best1) * m1, (r * m1 + best2) * m2)

    def window_bounds(self, r: int) -> tuple[tuple[int, int], tuple[int, int]]:
        m1, m2 = self.rates
        return (r * m2, (r + 2) * m2), (r * m1, (r + 1) * m1)


def coprime_plan(m1: int, m2: int, K: int, L: int) -> CoprimePlan:
    if m1 < 2 or m2 < 2:
        raise DomainError(f"rates must be >= 2, got ({m1}, {m2})")
    if math.gcd(m1, m2) != 1:
        raise NotCoprimeError(f"gcd({m1}, {m2}) = {math.gcd(m1, m2)} != 1")
    if K > m1 * m2:
        raise DomainError(f"K={K} exceeds M1*M2={m1 * m2}")
    if K < 1 or L < 1:
        raise DomainError(f"need K, L >= 1, got K={K}, L={L}")
    return CoprimePlan(m1, m2, K, L)


@dataclass(frozen=True)
class DegeneracyReport:
    ok: bool
    violations: tuple[tuple[int, int, int], ...]
    min_margin: float

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [list(v) for v in self.violations],
                "min_margin": self.min_margin}


def _wrap(x: np.ndarray) -> np.ndarray:
    two_pi = 2 * np.pi * np.longdouble(1)
    return x - two_pi * np.round(x / two_pi)


def degeneracy_check(sol: DioSolution3, freqs: Sequence[float],
                     tol: float = 1e-12) -> DegeneracyReport:
    """Flag source triples whose cross term does not average out over ``l``.

    The cross term of sources ``(i, u, v)`` on samplers ``(1, 2, 3)`` rotates
    by ``a1 M1 w_i + a2 M2 w_u + a3 M3 w_v`` per snapshot, which equals
    ``a1 M1 (w_i - w_v) + a2 M2 (w_u - w_v)``. A rotation within ``tol`` of
    a multiple of 2 pi never averages out.
    """
    w = np.asarray(freqs, dtype=np.longdouble)
    if len(set(np.asarray(freqs, dtype=float).tolist())) != w.size:
        raise DomainError("frequencies must be distinct")
    am = [np.longdouble(a) * m for a, m in zip(sol.a, sol.rates)]
    violations = []
    margin = math.inf
    D = w.size
    for i in range(D):
        for u in range(D):
            for v in range(D):
                if i == u == v:
                    continue
                c = am[0] * w[i] + am[1] * w[u] + am[2] * w[v]
                dist = float(abs(_wrap(c)))
                margin = min(margin, dist)
                if dist < tol:
                    violations.append((i, u, v))
    return DegeneracyReport(not violations, tuple(violations), margin)
