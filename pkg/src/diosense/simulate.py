"""Synthetic tone streams and array snapshots.

Phases of the form ``omega * n * M`` reach ~1e9 rad for large undersampling
rates, so they are formed in extended precision and reduced mod 2*pi before
the complex exponential is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .coarray import ArrayGeometry
from .errors import DomainError

_TWO_PI = np.longdouble(2) * np.longdouble(np.pi)


@dataclass(frozen=True)
class SourceSet:
    amplitudes: tuple[float, ...]
    freqs: tuple[float, ...]
    phases: tuple[float, ...]

    def __post_init__(self):
        d = len(self.freqs)
        if d < 1:
            raise DomainError("need at least one source")
        if len(self.amplitudes) != d or len(self.phases) != d:
            raise DomainError("amplitudes, freqs and phases must have equal length")
        if len(set(self.freqs)) != d:
            raise DomainError("frequencies must be distinct")
        if min(self.amplitudes) <= 0:
            raise DomainError("amplitudes must be positive")
        for w in self.freqs:
            if not -math.pi < w <= math.pi:
                raise DomainError(f"frequency {w} outside (-pi, pi]")

    @property
    def D(self) -> int:
        return len(self.freqs)

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.square(self.amplitudes)))

    @classmethod
    def random(cls, D: int, rng: np.random.Generator, min_sep: float = 0.0,
               amplitude: float = 1.0) -> "SourceSet":
        """Uniform frequencies with circular separation ``min_sep`` and uniform phases."""
        freqs = _draw_separated(D, rng, -math.pi, math.pi, min_sep, circular=True)
        freqs = [math.pi if f == -math.pi else f for f in freqs]
        phases = rng.uniform(0.0, 2 * math.pi, D)
        return cls((amplitude,) * D, tuple(freqs), tuple(float(p) for p in phases))


@dataclass(frozen=True)
class DoaScene:
    """Far-field sources: angles in radians, complex gains, temporal rotations."""

    angles: tuple[float, ...]
    gains: tuple[complex, ...]
    rotations: tuple[float, ...] = field(default=())

    def __post_init__(self):
        d = len(self.angles)
        if d < 1:
            raise DomainError("need at least one source")
        if len(self.gains) != d:
            raise DomainError("angles and gains must have equal length")
        if not self.rotations:
            object.__setattr__(self, "rotations", (0.0,) * d)
        elif len(self.rotations) != d:
            raise DomainError("rotations must match the number of sources")
        if len(set(self.angles)) != d:
            raise DomainError("angles must be distinct")
        for t in self.angles:
            if not -math.pi / 2 < t < math.pi / 2:
                raise DomainError(f"angle {t} outside (-pi/2, pi/2)")

    @property
    def D(self) -> int:
        return len(self.angles)

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.abs(np.asarray(self.gains)) ** 2))

    @classmethod
    def random(cls, D: int, rng: np.random.Generator, min_sep: float = 0.0,
               max_angle: float = math.radians(60), rotate: bool = False) -> "DoaScene":
        """Uniform angles in ``[-max_angle, max_angle]``, unit-modulus gains.

        ``rotate=True`` draws a distinct temporal rotation per source so that
        cross-source products decorrelate across snapshots.
        """
        angles = _draw_separated(D, rng, -max_angle, max_angle, min_sep)
        gains = np.exp(1j * rng.uniform(0.0, 2 * math.pi, D))
        rot = ()
        if rotate:
            rot = tuple(float(r) for r in _draw_separated(D, rng, -math.pi, math.pi, 0.3,
                                                          circular=True))
        return cls(tuple(angles), tuple(complex(g) for g in gains), rot)


@dataclass(frozen=True)
class NoiseSpec:
    power: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.power < 0:
            raise DomainError(f"noise power must be >= 0, got {self.power}")

    def rng(self, *stream: int) -> np.random.Generator:
        """Independent generator per ``stream`` key under the same seed."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *stream]))


def _draw_separated(D: int, rng: np.random.Generator, lo: float, hi: float,
                    min_sep: float, circular: bool = False, tries: int = 10_000) -> list[float]:
    for _ in range(tries):
        x = np.sort(rng.uniform(lo, hi, D))
        gaps = np.diff(x)
        if circular and D > 1:
            gaps = np.append(gaps, x[0] + (hi - lo) - x[-1])
        if D == 1 or gaps.min() >= min_sep:
            return [float(v) for v in x]
    raise DomainError(f"could not place {D} values with separation {min_sep} in [{lo}, {hi}]")


def snr_to_noise_power(snr_db: float, signal_power: float = 1.0) -> float:
    """Noise power giving ``snr_db`` against the per-source average power."""
    return signal_power / 10 ** (snr_db / 10)


def complex_noise(rng: np.random.Generator, power: float, shape) -> np.ndarray:
    """Circular complex Gaussian noise with total power ``power``."""
    if power == 0:
        return np.zeros(shape, dtype=np.complex128)
    scale = math.sqrt(power / 2)
    # (re, im) drawn as adjacent pairs so a longer draw extends a shorter one
    z = rng.standard_normal((*np.atleast_1d(shape), 2))
    return scale * (z[..., 0] + 1j * z[..., 1])


def _cis(phase: np.ndarray) -> np.ndarray:
    reduced = np.fmod(phase, _TWO_PI).astype(np.float64)
    return np.cos(reduced) + 1j * np.sin(reduced)


def tone_samples(src: SourceSet, M: int, indices: np.ndarray) -> np.ndarray:
    """Noiseless ``sum_i A_i exp(j(omega_i n M + phi_i))`` at integer ``indices``."""
    n = np.asarray(indices, dtype=np.int64)
    tick = n.astype(np.longdouble) * np.longdouble(M)
    out = np.zeros(n.shape, dtype=np.complex128)
    for a, w, p in zip(src.amplitudes, src.freqs, src.phases):
        out += a * _cis(np.longdouble(w) * tick + np.longdouble(p))
    return out


def gen_stream(src: SourceSet, M: int, count: int, noise: NoiseSpec = NoiseSpec(),
               stream: int = 0) -> np.ndarray:
    """Samples ``x[n] = x(n M T_s) + w(n)`` for ``n = 0 .. count-1``.

    ``stream`` selects an independent noise sequence, so several samplers
    can share one :class:`NoiseSpec`.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if M < 1:
        raise DomainError(f"undersampling rate must be >= 1, got {M}")
    x = tone_samples(src, M, np.arange(count))
    if noise.power > 0:
        x = x + complex_noise(noise.rng(stream), noise.power, count)
    return x


def steering_matrix(positions: Sequence[int], angles: Sequence[float]) -> np.ndarray:
    """``exp(j pi p sin(theta))`` for positions in half-wavelength units."""
    p = np.asarray(positions, dtype=np.float64)[:, None]
    return np.exp(1j * np.pi * p * np.sin(np.asarray(angles, dtype=np.float64))[None, :])


def gen_array_snapshots(S: ArrayGeometry | Sequence[int], scene: DoaScene, L: int,
                        noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """``|S| x L`` snapshot matrix; column ``n-1`` is snapshot time ``n``."""
    if L < 1:
        raise DomainError(f"need L >= 1 snapshots, got {L}")
    pos = S.positions if isinstance(S, ArrayGeometry) else tuple(S)
    A = steering_matrix(pos, scene.angles)
    n = np.arange(1, L + 1)
    src = np.asarray(scene.gains)[:, None] * np.exp(1j * np.outer(scene.rotations, n))
    X = A @ src
    if noise.power > 0:
        # drawn snapshot by snapshot so a longer record extends a shorter one
        X = X + complex_noise(noise.rng(), noise.power, X.shape[::-1]).T
    return X


def dump_stream(x: np.ndarray, path: str | Path) -> None:
    """Interleaved little-endian float64 (re, im) pairs."""
    np.asarray(x, dtype="<c16").tofile(path)


def load_stream(path: str | Path) -> np.ndarray:
    return np.fromfile(path, dtype="<c16").astype(np.complex128)
