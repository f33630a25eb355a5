import math

import numpy as np
import pytest

from diosense import geometry
from diosense.errors import DomainError
from diosense.simulate import (
    DoaScene,
    NoiseSpec,
    SourceSet,
    complex_noise,
    dump_stream,
    gen_array_snapshots,
    gen_stream,
    load_stream,
    snr_to_noise_power,
    steering_matrix,
    tone_samples,
)


def test_unit_tone():
    x = gen_stream(SourceSet((1.0,), (0.0,), (0.0,)), 1, 5)
    assert np.allclose(x, 1.0)


def test_stream_matches_analytic():
    src = SourceSet((1.0, 0.5), (0.7, -2.1), (0.3, 1.0))
    M, n = 37, np.arange(200)
    want = sum(a * np.exp(1j * (w * n * M + p)) for a, w, p in zip(src.amplitudes, src.freqs, src.phases))
    # the float64 reference itself is only good to about |phase| * eps
    assert np.max(np.abs(gen_stream(src, M, 200) - want)) < 1e-11


def test_large_index_phase_accuracy():
    src = SourceSet((1.0,), (1.234567,), (0.0,))
    M = 10**6 + 5
    x = gen_stream(src, M, 3000)
    # rate M at index n is the same instant as rate 1 at index n*M
    n = np.array([0, 17, 2999])
    ref = np.array([complex(math.cos(w), math.sin(w)) for w in
                    (math.fmod(1.234567 * int(k) * M, 2 * math.pi) for k in n)])
    direct = tone_samples(src, 1, n * M)
    assert np.max(np.abs(x[n] - direct)) < 1e-9
    assert np.max(np.abs(x[n] - ref)) < 1e-6


def test_seed_determinism_and_streams():
    src = SourceSet((1.0,), (0.2,), (0.0,))
    a = gen_stream(src, 3, 50, NoiseSpec(0.1, seed=4))
    b = gen_stream(src, 3, 50, NoiseSpec(0.1, seed=4))
    c = gen_stream(src, 3, 50, NoiseSpec(0.1, seed=4), stream=1)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_noise_power():
    rng = np.random.default_rng(0)
    w = complex_noise(rng, 0.3, 100_000)
    assert abs(np.mean(np.abs(w) ** 2) / 0.3 - 1) < 0.05
    assert abs(np.var(w.real) - np.var(w.imag)) < 0.01
    assert snr_to_noise_power(10, 2.0) == pytest.approx(0.2)


def test_source_validation():
    with pytest.raises(DomainError):
        SourceSet((1.0, 1.0), (0.1, 0.1), (0.0, 0.0))
    with pytest.raises(DomainError):
        SourceSet((1.0,), (4.0,), (0.0,))
    with pytest.raises(DomainError):
        SourceSet((0.0,), (1.0,), (0.0,))
    with pytest.raises(DomainError):
        NoiseSpec(-1.0)


def test_random_sources_respect_separation():
    rng = np.random.default_rng(2)
    for _ in range(50):
        src = SourceSet.random(6, rng, min_sep=0.3)
        f = np.sort(src.freqs)
        gaps = np.append(np.diff(f), f[0] + 2 * math.pi - f[-1])
        assert gaps.min() >= 0.3 - 1e-12
    with pytest.raises(DomainError):
        SourceSet.random(30, rng, min_sep=0.5)


def test_broadside_and_rank_one():
    geo = geometry.dio3_array(4, 3, 5)
    X = gen_array_snapshots(geo, DoaScene((0.0,), (1 + 0j,)), 8)
    assert np.allclose(X, 1.0)
    X = gen_array_snapshots(geo, DoaScene((0.4,), (0.5j,), (0.9,)), 20)
    s = np.linalg.svd(X, compute_uv=False)
    assert s[1] / s[0] < 1e-12


def test_two_sources_lie_in_steering_span():
    geo = geometry.dio3_array(4, 3, 5)
    scene = DoaScene((-0.3, 0.5), (1 + 0j, 0.7j), (0.4, -1.2))
    X = gen_array_snapshots(geo, scene, 30)
    A = steering_matrix(geo.positions, scene.angles)
    Q, _ = np.linalg.qr(A)
    assert np.linalg.norm(X - Q @ (Q.conj().T @ X)) < 1e-10


def test_snapshot_noise_extends_prefix():
    geo = geometry.dio3_array(4, 3, 5)
    scene = DoaScene((0.2,), (1 + 0j,))
    short = gen_array_snapshots(geo, scene, 18, NoiseSpec(0.5, 9))
    long = gen_array_snapshots(geo, scene, 50, NoiseSpec(0.5, 9))
    assert np.array_equal(short, long[:, :18])


def test_binary_round_trip(tmp_path):
    x = gen_stream(SourceSet((1.0,), (0.5,), (0.1,)), 2, 64, NoiseSpec(0.2, 1))
    path = tmp_path / "x.bin"
    dump_stream(x, path)
    assert path.stat().st_size == 64 * 16
    assert np.array_equal(load_stream(path), x)
