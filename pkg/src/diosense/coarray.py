"""Sparse-ruler engine: cross sums, higher-order difference sets, DoF counts.

Sets of integers are handled as dense indicator vectors over their range.
A q-fold sum set is q-1 convolutions of the position indicator with itself,
and the symmetric difference set is the correlation of that sum set with
itself. This keeps sixth-order analysis of 36-sensor arrays well under a
second, against the 36**6 tuples a direct loop would visit.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, ResourceLimitError

#: Largest indicator length handled before raising ResourceLimitError.
MAX_SPAN = 8_000_000
#: Largest tuple count for the distinct-index enumeration path.
MAX_TUPLES = 20_000_000
# below this many multiply-adds, convolve exactly in integers
_DIRECT_CONV_LIMIT = 2_000_000


@dataclass(frozen=True)
class ArrayGeometry:
    """Sorted, distinct integer sensor positions in units of d = lambda/2."""

    positions: tuple[int, ...]
    label: str = "custom"
    claims: dict = field(default_factory=dict, compare=False)
    unit: str = "half-wavelength"

    def __post_init__(self):
        pos = tuple(int(p) for p in self.positions)
        if not pos:
            raise DomainError("an array needs at least one sensor")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise DomainError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_positions(cls, positions: Iterable[int], label="custom", claims=None):
        """Sort and merge duplicates; records the raw count in ``claims``."""
        raw = [int(p) for p in positions]
        claims = dict(claims or {})
        claims.setdefault("raw_count", len(raw))
        return cls(tuple(sorted(set(raw))), label, claims)

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def aperture(self) -> int:
        return self.positions[-1] - self.positions[0]

    def array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=np.int64)

    def translated(self) -> "ArrayGeometry":
        """Same array shifted so the first sensor sits at 0."""
        p0 = self.positions[0]
        return ArrayGeometry(tuple(p - p0 for p in self.positions), self.label,
                             dict(self.claims), self.unit)

    def to_dict(self, translate: bool = False) -> dict:
        geo = self.translated() if translate else self
        return {
            "label": geo.label,
            "unit": geo.unit,
            "positions": list(geo.positions),
            "claims": dict(geo.claims),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArrayGeometry":
        return cls(tuple(data["positions"]), data.get("label", "custom"),
                   dict(data.get("claims", {})), data.get("unit", "half-wavelength"))


Positions = Union[ArrayGeometry, Sequence[int], np.ndarray]


def _as_array(S: Positions) -> np.ndarray:
    if isinstance(S, ArrayGeometry):
        return S.array()
    arr = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S,
                               dtype=np.int64))
    if arr.size == 0:
        raise DomainError("empty position set")
    return arr


# -- dense indicator algebra ------------------------------------------------

@dataclass(frozen=True)
class _Support:
    """Indicator of an integer set: ``bits[i]`` set iff ``offset + i`` in set."""

    bits: np.ndarray
    offset: int

    @classmethod
    def of(cls, values: np.ndarray) -> "_Support":
        lo = int(values.min())
        span = int(values.max()) - lo + 1
        _guard(span)
        bits = np.zeros(span, dtype=bool)
        bits[values - lo] = True
        return cls(bits, lo)

    def negate(self) -> "_Support":
        return _Support(self.bits[::-1].copy(), -(self.offset + self.bits.size - 1))

    def values(self) -> np.ndarray:
        return np.flatnonzero(self.bits).astype(np.int64) + self.offset


def _guard(span: int) -> None:
    if span > MAX_SPAN:
        raise ResourceLimitError(
            f"indicator span {span} exceeds limit {MAX_SPAN}",
            advisory="reduce the order or the array aperture, or raise "
                     "diosense.coarray.MAX_SPAN if memory allows",
        )


def _convolve_bits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size * b.size <= _DIRECT_CONV_LIMIT:
        return np.convolve(a.astype(np.int64), b.astype(np.int64)) > 0
    raw = fftconvolve(a.astype(np.float64), b.astype(np.float64))
    # every entry is a nonnegative integer count; rounding must stay far from 0.5
    if np.max(np.abs(raw - np.rint(raw))) > 0.25:
        raise ArithmeticError("FFT convolution lost integer precision")
    return raw > 0.5


def _sum(x: _Support, y: _Support) -> _Support:
    _guard(x.bits.size + y.bits.size - 1)
    return _Support(_convolve_bits(x.bits, y.bits), x.offset + y.offset)


def _qfold_sum(base: _Support, q: int) -> _Support:
    acc = base
    for _ in range(q - 1):
        acc = _sum(acc, base)
    return acc


# -- public types -----------------------------------------------------------

@dataclass(frozen=True)
class LagSet:
    """Distinct integer lags of a (higher-order) difference set."""

    distinct: np.ndarray
    order: int | None = None

    @cached_property
    def distinct_count(self) -> int:
        return int(self.distinct.size)

    @cached_property
    def consecutive_radius(self) -> int:
        return consecutive_radius(self)

    @property
    def dof(self) -> int:
        """Lags usable by a subspace estimator: the hole-free segment, ``2U + 1``."""
        return 2 * self.consecutive_radius + 1

    @cached_property
    def holes(self) -> np.ndarray:
        lo, hi = int(self.distinct[0]), int(self.distinct[-1])
        present = np.zeros(hi - lo + 1, dtype=bool)
        present[self.distinct - lo] = True
        return np.flatnonzero(~present).astype(np.int64) + lo

    def __contains__(self, lag: int) -> bool:
        i = np.searchsorted(self.distinct, lag)
        return bool(i < self.distinct.size and self.distinct[i] == lag)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.distinct, -self.distinct[::-1]))

    def to_dict(self, tau: "SpacingHistogram | None" = None, holes: bool = True) -> dict:
        out = {
            "order": self.order,
            "dof": self.dof,
            "consecutive_radius": self.consecutive_radius,
            "distinct_lags": self.distinct_count,
            "min_lag": int(self.distinct[0]),
            "max_lag": int(self.distinct[-1]),
        }
        if holes:
            out["holes"] = self.holes.tolist()
        if tau is not None:
            out["tau"] = tau.to_dict()["tau"]
        return out


@dataclass(frozen=True)
class SpacingHistogram:
    """Adjacent-gap counts: ``tau[j]`` pairs of neighbours sit ``j*d`` apart."""

    tau: dict[int, int]

    @property
    def min_spacing(self) -> int:
        return min(self.tau)

    @property
    def total(self) -> int:
        return sum(self.tau.values())

    def to_dict(self) -> dict:
        return {"min_spacing": self.min_spacing,
                "tau": {str(j): c for j, c in sorted(self.tau.items())}}

    def to_csv(self) -> str:
        lines = ["j,count"]
        lines += [f"{j},{c}" for j, c in sorted(self.tau.items())]
        return "\n".join(lines) + "\n"


# -- operations -------------------------------------------------------------

def cross_sum(terms: Sequence[tuple[int, Positions]]) -> set[int]:
    """``{sum_i sign_i * p_i : p_i in S_i}`` for a list of ``(sign, S_i)``."""
    if not terms:
        raise DomainError("cross_sum needs at least one term")
    acc = None
    for sign, S in terms:
        if sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {sign}")
        sup = _Support.of(_as_array(S))
        if sign < 0:
            sup = sup.negate()
        acc = sup if acc is None else _sum(acc, sup)
    return set(acc.values().tolist())


def symmetric_difference_2q(S: Positions, q: int, allow_repeats: bool = True) -> LagSet:
    """All ``sum_{i<=q} p_{n_i} - sum_{i>q} p_{n_i}``.

    With ``allow_repeats`` the indices range freely over the sensors (the
    moment-estimator virtual array). Without it all 2q indices must differ.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    pos = _as_array(S)
    if not allow_repeats:
        return _symmetric_difference_distinct(pos, q)
    # differences are translation invariant
    base = _Support.of(pos - pos[0])
    _guard(q * (base.bits.size - 1) + 1)
    sums = _qfold_sum(base, q)
    lags = _sum(sums, sums.negate())
    return LagSet(lags.values(), order=2 * q)


def _symmetric_difference_distinct(pos: np.ndarray, q: int) -> LagSet:
    n = pos.size
    if n < 2 * q:
        raise DomainError(f"distinct-index order {2 * q} needs >= {2 * q} sensors, got {n}")
    count = math.comb(n, 2 * q) * math.comb(2 * q, q)
    if count > MAX_TUPLES:
        raise ResourceLimitError(
            f"{count} index patterns exceed limit {MAX_TUPLES}",
            advisory="use allow_repeats=True (bitset path)",
        )
    vals = set()
    p = pos.tolist()
    for idx in combinations(range(n), 2 * q):
        total = sum(p[i] for i in idx)
        for plus in combinations(idx, q):
            s = sum(p[i] for i in plus)
            vals.add(2 * s - total)
    return LagSet(np.array(sorted(vals), dtype=np.int64), order=2 * q)


def third_order_signed_set(S: Positions) -> LagSet:
    """``{ +-(p_a - p_b + p_c) }`` over all sensor triples, repeats allowed."""
    pos = _as_array(S)
    return LagSet(_signed_triple_values(pos), order=3)


def plus_pattern_triple_set(S: Positions) -> np.ndarray:
    """``{ p_a - p_b + p_c }`` (no overall sign flip), sorted."""
    pos = _as_array(S)
    base = _Support.of(pos)
    return _sum(_sum(base, base.negate()), base).values()


def _signed_triple_values(pos: np.ndarray) -> np.ndarray:
    plus = plus_pattern_triple_set(pos)
    return np.union1d(plus, -plus)


def consecutive_radius(L: LagSet | Iterable[int]) -> int:
    """Largest ``U`` with every integer of ``[-U, U]`` present.

    Raises:
        DomainError: when 0 is not a lag.
    """
    lags = L.distinct if isinstance(L, LagSet) else np.unique(np.fromiter(L, dtype=np.int64))
    i0 = np.searchsorted(lags, 0)
    if i0 >= lags.size or lags[i0] != 0:
        raise DomainError("0 is not in the lag set")
    pos = lags[i0:]
    neg = -lags[: i0 + 1][::-1]
    run_pos = _leading_run(pos)
    run_neg = _leading_run(neg)
    return int(min(run_pos, run_neg))


def _leading_run(seq: np.ndarray) -> int:
    """For sorted ``seq`` starting at 0: largest U with 0..U all present."""
    mismatch = np.flatnonzero(seq != np.arange(seq.size))
    return int(mismatch[0] - 1) if mismatch.size else int(seq.size - 1)


def weight_tau(S: Positions) -> SpacingHistogram:
    """Histogram of adjacent sensor gaps."""
    pos = _as_array(S)
    if pos.size < 2:
        raise DomainError("weight_tau needs at least two sensors")
    gaps = np.diff(pos)
    return SpacingHistogram(dict(sorted(Counter(gaps.tolist()).items())))


def verify_sparse_ruler(marks: Iterable[int], K: int) -> bool:
    """True iff every distance 1..K is a difference of two marks."""
    m = _as_array(list(marks))
    if 0 not in m:
        raise DomainError("a ruler must contain the mark 0")
    diffs = np.unique(np.abs(m[:, None] - m[None, :]))
    return bool(np.isin(np.arange(1, K + 1), diffs).all())


def dof_upper_bound_2q(q: int, n: int) -> Fraction:
    """``n**(2q) / (q!)**2``, the counting bound on a 2q-th order set."""
    if q < 1 or n < 1:
        raise DomainError(f"need q, n >= 1, got q={q}, n={n}")
    return Fraction(n ** (2 * q), math.factorial(q) ** 2)
