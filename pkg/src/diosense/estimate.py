"""Moment-sequence reconstruction and Hankel-MUSIC parameter estimation."""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DegenerateModelError, DomainError
from .geometry import dio3_array
from .numtheory import DioSolution3
from .sampling import (
    DiophantinePlan,
    SamplingPlan,
    TupleGroup,
    degeneracy_check,
)

#: Weakest accepted peak must exceed the grid median by this factor (20 dB).
LOW_CONFIDENCE_RATIO = 100.0


@dataclass(frozen=True)
class VirtualLagSequence:
    """Moment values ``v[k]`` for ``k = 0 .. K``."""

    values: np.ndarray
    provenance: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.size < 2:
            raise DomainError("need at least lags 0 and 1")
        if not np.isfinite(v[0]):
            raise DomainError("v[0] is not finite")
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.size - 1

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]


def _gather(streams: Sequence[np.ndarray], samplers: Sequence[int],
            idx: np.ndarray) -> list[np.ndarray]:
    out = []
    for col, s in enumerate(samplers):
        x = np.asarray(streams[s])
        need = int(idx[..., col].max())
        if need >= x.size:
            raise DomainError(f"sampler {s + 1} needs index {need}, stream has {x.size} samples")
        out.append(x[idx[..., col]])
    return out


def autocorr_plan(streams: Sequence[np.ndarray], plan: SamplingPlan,
                  provenance: str = "plan") -> VirtualLagSequence:
    """Average the signed sample products of every tuple group, lag by lag.

    A sampler with sign ``-1`` in its group enters conjugated.
    """
    if len(streams) != len(plan.rates):
        raise DomainError(f"plan has {len(plan.rates)} samplers, got {len(streams)} streams")
    acc = np.zeros(plan.K + 1, dtype=np.complex128)
    for g, grp in enumerate(plan.groups):
        idx = np.stack([plan.tuples(k, g) for k in range(plan.K + 1)])  # (K+1, L, w)
        prod = np.ones(idx.shape[:2], dtype=np.complex128)
        for sign, vals in zip(grp.signs, _gather(streams, grp.samplers, idx)):
            prod *= np.conj(vals) if sign < 0 else vals
        acc += prod.mean(axis=1)
    return VirtualLagSequence(acc / len(plan.groups), provenance,
                              {"K": plan.K, "L": plan.L, "rates": list(plan.rates)})


def autocorr_coprime(x1: np.ndarray, x2: np.ndarray, plan: SamplingPlan,
                     K: int | None = None, L: int | None = None) -> VirtualLagSequence:
    """Second-order estimate ``mean_r x1[m1] conj(x2[m2])``."""
    _check_plan_size(plan, K, L)
    return autocorr_plan([x1, x2], plan, "coprime")


def autocorr_dio3(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray,
                  sol: DioSolution3 | DiophantinePlan, K: int | None = None,
                  L: int | None = None, freqs: Sequence[float] | None = None
                  ) -> VirtualLagSequence:
    """Third-order estimate from three samplers.

    For one noiseless source the result is ``A^3 exp(j phi) exp(j omega k)``;
    with several sources each exponential carries weight ``A_i^3 exp(j phi_i)``.
    Passing ``freqs`` runs the degeneracy check and warns on failure.
    """
    if isinstance(sol, DiophantinePlan):
        plan = sol
        _check_plan_size(plan, K, L)
        sol = plan.groups[0].sol
    else:
        if K is None or L is None:
            raise DomainError("K and L are required with a bare solution")
        if K < 1 or L < 1:
            raise DomainError(f"need K, L >= 1, got K={K}, L={L}")
        plan = DiophantinePlan(sol.rates, K, L, [TupleGroup((0, 1, 2), sol.signs, sol)])
    if freqs is not None:
        report = degeneracy_check(sol, freqs)
        if not report.ok:
            warnings.warn(f"degenerate frequency set: {len(report.violations)} cross "
                          "terms do not average out", RuntimeWarning, stacklevel=2)
    return autocorr_plan([x1, x2, x3], plan, "dio3")


def _check_plan_size(plan: SamplingPlan, K, L) -> None:
    if K is not None and K > plan.K:
        raise DomainError(f"K={K} exceeds the plan's K={plan.K}")
    if L is not None and L != plan.L:
        raise DomainError(f"L={L} differs from the plan's L={plan.L}")


@dataclass(frozen=True)
class LagTable:
    """Sensor rows ``(l1, l2, l3)`` with ``p[l1] - p[l2] + p[l3] == k`` for ``k = 0 .. radius``."""

    params: tuple[int, int, int]
    positions: tuple[int, ...]
    rows: np.ndarray

    @property
    def radius(self) -> int:
        return self.rows.shape[0] - 1


@lru_cache(maxsize=64)
def lag_table(p1: int, p2: int, p3: int) -> LagTable:
    """Lexicographically first sensor triple for every nonnegative lag."""
    pos = np.asarray(dio3_array(p1, p2, p3).positions, dtype=np.int64)
    n = pos.size
    i, j, l = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    i, j, l = i.ravel(), j.ravel(), l.ravel()
    lag = pos[i] - pos[j] + pos[l]
    keep = lag >= 0
    i, j, l, lag = i[keep], j[keep], l[keep], lag[keep]
    # meshgrid order is lexicographic, so the first hit per lag is the smallest triple
    uniq, first = np.unique(lag, return_index=True)
    radius = 0
    while radius + 1 < uniq.size and uniq[radius + 1] == radius + 1:
        radius += 1
    if uniq.size == 0 or uniq[0] != 0:
        radius = -1
    rows = np.stack([i[first], j[first], l[first]], axis=1)[: radius + 1]
    rows.setflags(write=False)
    return LagTable((p1, p2, p3), tuple(int(p) for p in pos), rows)


def snapshot_pairs(L: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """0-based columns ``(c1, c2, c3)`` for times with ``n1 + n3 == n2``.

    With times ``n = c + 1`` there are ``L(L-1)/2`` such pairs.
    """
    c1, c3 = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    c1, c3 = c1.ravel(), c3.ravel()
    c2 = c1 + c3 + 1
    keep = c2 < L
    return c1[keep], c2[keep], c3[keep]


def spatial_dio3(snapshots: np.ndarray, params: Sequence[int], K: int) -> VirtualLagSequence:
    """Third-order spatial lag sequence from a ``dio3`` array.

    ``v[k]`` averages ``x_l1[n1] conj(x_l2[n2]) x_l3[n3]`` over all
    ``n1 + n3 == n2``. For one noiseless source with gain ``s`` at angle
    ``theta`` this equals ``|s|^2 s exp(j pi k sin(theta))``.
    """
    p1, p2, p3 = (int(p) for p in params)
    table = lag_table(p1, p2, p3)
    X = np.asarray(snapshots, dtype=np.complex128)
    if X.ndim != 2 or X.shape[0] != len(table.positions):
        raise DomainError(f"expected {len(table.positions)} sensor rows, got shape {X.shape}")
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    if K > table.radius:
        raise DomainError(f"lag {table.radius + 1} is not resolvable (K={K})")
    if X.shape[1] < 2:
        raise DomainError("need at least 2 snapshots")
    c1, c2, c3 = snapshot_pairs(X.shape[1])
    rows = table.rows[: K + 1]
    prod = (X[rows[:, 0:1], c1[None, :]]
            * np.conj(X[rows[:, 1:2], c2[None, :]])
            * X[rows[:, 2:3], c3[None, :]])
    return VirtualLagSequence(prod.mean(axis=1), "spatial_dio3",
                              {"params": [p1, p2, p3], "pairs": int(c1.size)})


@dataclass(frozen=True)
class Subspace:
    m: int
    D: int
    singular_values: np.ndarray
    signal: np.ndarray
    noise: np.ndarray

    @property
    def rank_ratio(self) -> float:
        """``sigma_{D+1} / sigma_1``; tiny when the model order is exact."""
        s = self.singular_values
        return float(s[self.D] / s[0]) if self.D < s.size else 0.0


def hankel_matrix(v: np.ndarray, m: int) -> np.ndarray:
    n = v.size
    return np.lib.stride_tricks.sliding_window_view(v, n + 1 - m).copy()


def hankel_subspace(v: VirtualLagSequence | np.ndarray, D: int, m: int | None = None) -> Subspace:
    """Split the column space of the ``m x (K+2-m)`` Hankel matrix of ``v``."""
    vals = v.values if isinstance(v, VirtualLagSequence) else np.asarray(v, dtype=np.complex128)
    K = vals.size - 1
    if m is None:
        m = (K + 2) // 2
    if m < 2 or 2 * m - 1 > K + 1:
        raise DomainError(f"window m={m} needs 2 <= m and 2m-1 <= K+1 (K={K})")
    if D < 1 or D >= m:
        raise DomainError(f"model order D={D} must satisfy 1 <= D < m={m}")
    if not np.any(vals):
        raise DegenerateModelError("lag sequence is identically zero")
    U, s, _ = np.linalg.svd(hankel_matrix(vals, m))
    return Subspace(m, D, s, U[:, :D], U[:, D:])


@dataclass(frozen=True)
class SpectrumResult:
    grid: np.ndarray
    pseudospectrum: np.ndarray
    peaks: tuple[float, ...]
    peak_ratio: float
    low_confidence: bool
    parameter: str = "frequency"
    meta: dict = field(default_factory=dict, compare=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.parameter},pseudospectrum\n")
        for g, p in zip(self.grid.tolist(), self.pseudospectrum.tolist()):
            buf.write(f"{g:.17g},{p:.17g}\n")
        footer = {"peaks": [float(f"{p:.17g}") for p in self.peaks],
                  "peak_ratio": float(f"{self.peak_ratio:.17g}"),
                  "low_confidence": self.low_confidence, **self.meta}
        buf.write("# " + json.dumps(footer, sort_keys=True) + "\n")
        return buf.getvalue()


def _phase_of(grid: np.ndarray, parameter: str) -> np.ndarray:
    if parameter == "frequency":
        return grid
    if parameter == "angle":
        return np.pi * np.sin(grid)
    raise DomainError(f"unknown parameter kind {parameter!r}")


def _local_maxima(P: np.ndarray, circular: bool) -> np.ndarray:
    if circular:
        left, right = np.roll(P, 1), np.roll(P, -1)
    else:
        left = np.concatenate([[-np.inf], P[:-1]])
        right = np.concatenate([P[1:], [-np.inf]])
    # strict on the left, non-strict on the right: a plateau yields its first point
    return np.flatnonzero((P > left) & (P >= right))


def music_spectrum(sub: Subspace, grid: np.ndarray, parameter: str = "frequency",
                   circular: bool | None = None) -> SpectrumResult:
    """``1 / ||E_n^H a||^2`` with ``a = exp(j phase * [0 .. m-1])``.

    ``parameter="angle"`` maps each grid angle to the spatial phase
    ``pi sin(theta)``. The ``D`` largest local maxima strictly above the grid
    median are returned in ascending order; ties resolve toward the lower grid
    value.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if sub.noise.shape[1] == 0:
        raise DomainError("noise subspace is empty")
    if circular is None:
        circular = parameter == "frequency"
    phase = _phase_of(grid, parameter)
    A = np.exp(1j * np.outer(np.arange(sub.m), phase))
    if sub.noise.shape[1] <= sub.signal.shape[1]:
        proj = np.sum(np.abs(sub.noise.conj().T @ A) ** 2, axis=0)
    else:
        # orthonormal basis: ||E_n^H a||^2 = m - ||E_s^H a||^2
        proj = sub.m - np.sum(np.abs(sub.signal.conj().T @ A) ** 2, axis=0)
    P = 1.0 / np.maximum(proj, np.finfo(float).tiny)
    median = float(np.median(P))
    cand = _local_maxima(P, circular)
    cand = cand[P[cand] > median]
    # stable sort on -P keeps ascending grid order among equal heights
    order = cand[np.argsort(-P[cand], kind="stable")]
    chosen = list(order[: sub.D])
    if len(chosen) < sub.D:
        rest = [i for i in np.argsort(-P, kind="stable") if i not in set(chosen)]
        chosen += rest[: sub.D - len(chosen)]
    ratio = float(min(P[i] for i in chosen) / median)
    peaks = tuple(float(grid[i]) for i in sorted(chosen, key=lambda i: grid[i]))
    return SpectrumResult(grid, P, peaks, ratio, ratio < LOW_CONFIDENCE_RATIO, parameter)


def frequency_grid(step: float = 1e-3) -> np.ndarray:
    """Uniform grid over ``[-pi, pi)``."""
    return -np.pi + step * np.arange(int(math.ceil(2 * np.pi / step)))


def angle_grid(step: float = math.radians(0.01), limit: float = math.radians(90)) -> np.ndarray:
    """Uniform grid over ``(-limit, limit)``."""
    n = int(math.floor(limit / step))
    return step * np.arange(-n, n + 1)


def wrap_angle(x):
    """Map to ``[-pi, pi)``."""
    return (np.asarray(x, dtype=np.float64) + np.pi) % (2 * np.pi) - np.pi


def rmse(estimates: Sequence[float], truth: Sequence[float], period: float | None = None) -> float:
    """RMSE after sorted matching.

    With ``period`` the values live on a circle: differences are wrapped and
    every cyclic shift of the sorted matching is tried.
    """
    e = np.sort(np.asarray(estimates, dtype=np.float64))
    t = np.sort(np.asarray(truth, dtype=np.float64))
    if e.size != t.size:
        raise DomainError(f"cardinality mismatch: {e.size} estimates vs {t.size} truths")
    if e.size == 0:
        raise DomainError("empty parameter lists")
    if period is None:
        return float(np.sqrt(np.mean((e - t) ** 2)))
    half = period / 2
    e = np.sort((e + half) % period - half)
    t = np.sort((t + half) % period - half)
    best = math.inf
    for shift in range(e.size):
        d = (np.roll(e, shift) - t + half) % period - half
        best = min(best, float(np.mean(d**2)))
    return math.sqrt(best)
