import json
import math

import numpy as np
import pytest

from diosense import geometry
from diosense.errors import DegenerateModelError, DomainError
from diosense.estimate import (
    LOW_CONFIDENCE_RATIO,
    VirtualLagSequence,
    angle_grid,
    autocorr_coprime,
    autocorr_dio3,
    frequency_grid,
    hankel_subspace,
    lag_table,
    music_spectrum,
    rmse,
    snapshot_pairs,
    spatial_dio3,
    wrap_angle,
)
from diosense.numtheory import solve_dio3_zero_sum
from diosense.sampling import coprime_plan, three_sampler_plan
from diosense.simulate import DoaScene, NoiseSpec, SourceSet, gen_array_snapshots, gen_stream


def _streams(src, plan, noise=NoiseSpec()):
    return [gen_stream(src, m, n, noise, stream=i)
            for i, (m, n) in enumerate(zip(plan.rates, plan.stream_lengths))]


def _truth(src, K, power=3):
    k = np.arange(K + 1)
    return sum(a**power * np.exp(1j * p) * np.exp(1j * w * k)
               for a, w, p in zip(src.amplitudes, src.freqs, src.phases))


@pytest.mark.parametrize("gamma", [0, 1000, 10**6])
def test_dio3_single_source_exact(gamma):
    src = SourceSet((1.3,), (0.83,), (0.4,))
    plan = three_sampler_plan(gamma, 40, 25)
    v = autocorr_dio3(*_streams(src, plan), plan)
    assert v.K == 40
    assert np.max(np.abs(v.values - _truth(src, 40))) < 1e-10


def test_dio3_with_bare_solution():
    src = SourceSet((1.0,), (-2.0,), (0.0,))
    sol = solve_dio3_zero_sum(2, 3, 5)
    plan = three_sampler_plan(0, 10, 10)
    v = autocorr_dio3(*_streams(src, plan), sol, K=10, L=10)
    assert np.allclose(v.values, _truth(src, 10), atol=1e-12)
    with pytest.raises(DomainError):
        autocorr_dio3(*_streams(src, plan), sol)


def test_zero_signal_gives_zero_sequence():
    plan = three_sampler_plan(0, 5, 5)
    xs = [np.zeros(n, complex) for n in plan.stream_lengths]
    assert not np.any(autocorr_dio3(*xs, plan).values)


def test_short_stream_rejected():
    plan = three_sampler_plan(0, 5, 5)
    xs = [np.ones(n - 1, complex) for n in plan.stream_lengths]
    with pytest.raises(DomainError, match="needs index"):
        autocorr_dio3(*xs, plan)


@pytest.mark.parametrize("D,L,tol", [(2, 1000, 1e-2), (3, 2000, 1e-1)])
def test_dio3_multi_tone_converges(D, L, tol):
    src = SourceSet((1.0,) * D, (0.5, -1.3, 2.2)[:D], (0.1, 0.7, 1.9)[:D])
    plan = three_sampler_plan(0, 30, L)
    v = autocorr_dio3(*_streams(src, plan), plan, freqs=src.freqs)
    assert np.max(np.abs(v.values - _truth(src, 30))) < tol


def test_dio3_degenerate_set_warns():
    src = SourceSet((1.0, 1.0), (0.0, 2 * math.pi / 3), (0.0, 0.0))
    plan = three_sampler_plan(0, 4, 4)
    with pytest.warns(RuntimeWarning, match="degenerate"):
        autocorr_dio3(*_streams(src, plan), plan, freqs=src.freqs)


def test_coprime_single_tone():
    src = SourceSet((0.8,), (1.1,), (2.0,))
    plan = coprime_plan(3, 5, 15, 20)
    v = autocorr_coprime(*_streams(src, plan), plan)
    k = np.arange(16)
    assert np.allclose(v.values, 0.64 * np.exp(1j * 1.1 * k), atol=1e-12)


def test_lag_table_resolves_and_is_first():
    table = lag_table(4, 3, 5)
    assert table.radius >= 59
    pos = np.asarray(table.positions)
    for k, (a, b, c) in enumerate(table.rows.tolist()):
        assert pos[a] - pos[b] + pos[c] == k
    # brute-force the lexicographic minimum for a few lags
    n = pos.size
    for k in (0, 1, 17, 59):
        first = next((a, b, c) for a in range(n) for b in range(n) for c in range(n)
                     if pos[a] - pos[b] + pos[c] == k)
        assert tuple(table.rows[k]) == first


def test_snapshot_pairs():
    c1, c2, c3 = snapshot_pairs(18)
    assert c1.size == 153
    assert np.all((c1 + 1) + (c3 + 1) == c2 + 1)
    assert snapshot_pairs(1)[0].size == 0


def test_spatial_single_source():
    geo = geometry.dio3_array(4, 3, 5)
    s, theta = 0.6 * np.exp(0.5j), 0.35
    X = gen_array_snapshots(geo, DoaScene((theta,), (s,)), 10)
    v = spatial_dio3(X, (4, 3, 5), 59)
    k = np.arange(60)
    want = abs(s) ** 2 * s * np.exp(1j * np.pi * k * math.sin(theta))
    assert np.max(np.abs(v.values - want)) < 1e-12
    assert v.meta["pairs"] == 45
    with pytest.raises(DomainError, match="not resolvable"):
        spatial_dio3(X, (4, 3, 5), lag_table(4, 3, 5).radius + 1)
    with pytest.raises(DomainError):
        spatial_dio3(X[:5], (4, 3, 5), 10)


def test_hankel_rank_one():
    k = np.arange(41)
    sub = hankel_subspace(2.0 * np.exp(0.9j * k), 1)
    assert sub.m == 21
    assert sub.rank_ratio < 1e-10


def test_hankel_rank_d_random():
    rng = np.random.default_rng(8)
    k = np.arange(61)
    for _ in range(50):
        D = int(rng.integers(1, 6))
        src = SourceSet.random(D, rng, min_sep=0.2)
        v = sum(np.exp(1j * (w * k + p)) for w, p in zip(src.freqs, src.phases))
        sub = hankel_subspace(v, D)
        assert sub.rank_ratio < 1e-8
        assert sub.singular_values[D - 1] / sub.singular_values[0] > 1e-6


def test_hankel_errors():
    with pytest.raises(DegenerateModelError):
        hankel_subspace(np.zeros(21), 2)
    with pytest.raises(DomainError):
        hankel_subspace(np.ones(21), 11)
    with pytest.raises(DomainError):
        hankel_subspace(np.ones(21), 2, m=12)
    with pytest.raises(DomainError):
        VirtualLagSequence(np.ones(1), "x")


def test_music_two_tones():
    k = np.arange(61)
    v = np.exp(1j * 0.8 * k) + 0.7 * np.exp(1j * (1.7 * k + 1.0))
    grid = frequency_grid()
    res = music_spectrum(hankel_subspace(v, 2), grid)
    assert np.allclose(res.peaks, (0.8, 1.7), atol=1e-3)
    assert not res.low_confidence
    assert res.peak_ratio > LOW_CONFIDENCE_RATIO


def test_music_wraps_around_pi():
    k = np.arange(61)
    v = np.exp(1j * (math.pi - 2e-4) * k) + np.exp(-1j * 1.0 * k)
    res = music_spectrum(hankel_subspace(v, 2), frequency_grid())
    assert rmse(res.peaks, (math.pi - 2e-4, -1.0), period=2 * math.pi) < 1e-3


def test_music_noise_only_flagged():
    rng = np.random.default_rng(0)
    flagged = 0
    for _ in range(40):
        v = rng.standard_normal(61) + 1j * rng.standard_normal(61)
        flagged += music_spectrum(hankel_subspace(v, 3), frequency_grid(1e-2)).low_confidence
    assert flagged == 40


def test_music_angles():
    geo = geometry.dio3_array(4, 3, 5)
    scene = DoaScene((-0.4, 0.3), (1 + 0j, 1j), (0.5, -1.5))
    X = gen_array_snapshots(geo, scene, 50)
    v = spatial_dio3(X, (4, 3, 5), 59)
    res = music_spectrum(hankel_subspace(v, 2), angle_grid(), parameter="angle")
    assert rmse(res.peaks, scene.angles) < math.radians(0.5)


def test_spectrum_csv_footer():
    k = np.arange(21)
    res = music_spectrum(hankel_subspace(np.exp(0.3j * k), 1), frequency_grid(0.1))
    lines = res.to_csv().splitlines()
    assert lines[0] == "frequency,pseudospectrum"
    assert len(lines) == 2 + res.grid.size
    footer = json.loads(lines[-1][2:])
    assert footer["peaks"] == list(res.peaks)
    assert footer["low_confidence"] is res.low_confidence
    assert footer["peak_ratio"] == res.peak_ratio


def test_rmse_and_wrap():
    assert rmse([1.0, 2.0], [2.0, 1.0]) == 0
    assert rmse([0.0], [3.0]) == 3
    assert rmse([math.pi - 0.01], [-math.pi + 0.01], period=2 * math.pi) == pytest.approx(0.02)
    assert wrap_angle(3 * math.pi) == pytest.approx(-math.pi)
    with pytest.raises(DomainError):
        rmse([1.0], [1.0, 2.0])
