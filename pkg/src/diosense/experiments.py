"""Monte Carlo sweeps and reproduction recipes driven by the CLI.

Every trial draws its scene from ``SeedSequence([seed, trial])`` and its
noise from ``SeedSequence([seed, trial, snr_index])``, so scenes are paired
across SNR points (and across snapshot counts for DoA) and any single trial
can be re-run from the logged seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import spearmanr

from . import coarray, geometry
from .errors import DomainError
from .estimate import (
    angle_grid,
    autocorr_dio3,
    frequency_grid,
    hankel_subspace,
    music_spectrum,
    rmse,
    spatial_dio3,
)
from .sampling import coprime_plan, n_sampler_plan, three_sampler_plan
from .serialize import snr_range
from .simulate import DoaScene, NoiseSpec, SourceSet, gen_array_snapshots, gen_stream, snr_to_noise_power

FREQ_DEFAULTS: dict[str, Any] = {
    "gamma": 1_000_000,
    "K": 300,
    "L": 300,
    "D": 5,
    "snr_db": "-10:10:2",
    "trials": 100,
    "seed": 0,
    "grid_step": 1e-3,
    "min_sep": 0.1,
    "amplitude": 1.0,
    "workers": 1,
}

DOA_DEFAULTS: dict[str, Any] = {
    "p": [4, 3, 5],
    "K": 59,
    "L": [18, 50],
    "D": 3,
    "snr_db": "-10:10:2",
    "trials": 100,
    "seed": 0,
    "grid_step_deg": 0.01,
    "min_sep_deg": 10.0,
    "max_angle_deg": 60.0,
    "rotate": True,
    "workers": 1,
}


def noise_seed(seed: int, trial: int, snr_index: int) -> int:
    state = np.random.SeedSequence([seed, trial, snr_index]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def _merge(defaults: dict, cfg: dict) -> dict:
    unknown = sorted(set(cfg) - set(defaults) - {"kind", "out"})
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    out = {**defaults, **cfg}
    if int(out["trials"]) < 1:
        raise DomainError("trials must be >= 1")
    out["snr_db"] = snr_range(out["snr_db"])
    if not out["snr_db"]:
        raise DomainError("SNR list is empty")
    return out


@dataclass(frozen=True)
class _FreqJob:
    cfg: dict
    trial: int


def _freq_trial(job: _FreqJob) -> dict:
    c = job.cfg
    plan = three_sampler_plan(int(c["gamma"]), int(c["K"]), int(c["L"]))
    grid = frequency_grid(float(c["grid_step"]))
    rng = np.random.default_rng([int(c["seed"]), job.trial])
    src = SourceSet.random(int(c["D"]), rng, float(c["min_sep"]), float(c["amplitude"]))
    errs, seeds = [], []
    for si, snr in enumerate(c["snr_db"]):
        ns = NoiseSpec(snr_to_noise_power(snr, src.mean_power), noise_seed(int(c["seed"]), job.trial, si))
        xs = [gen_stream(src, m, n, ns, stream=s)
              for s, (m, n) in enumerate(zip(plan.rates, plan.stream_lengths))]
        spec = music_spectrum(hankel_subspace(autocorr_dio3(*xs, plan), src.D), grid)
        errs.append(rmse(spec.peaks, src.freqs, period=2 * math.pi))
        seeds.append(ns.seed)
    return {"trial": job.trial, "freqs": list(src.freqs), "rmse": errs, "noise_seeds": seeds}


def _run(fn, jobs, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _trend(snrs: list[float], means: list[float]) -> float | None:
    if len(snrs) < 2 or np.ptp(means) == 0:
        return None
    return float(spearmanr(snrs, means)[0])


def run_freq(cfg: dict | None = None) -> dict:
    """RMSE (rad) versus SNR for three-sampler frequency estimation."""
    c = _merge(FREQ_DEFAULTS, cfg or {})
    trials = _run(_freq_trial, [_FreqJob(c, t) for t in range(int(c["trials"]))], int(c["workers"]))
    table = np.array([t["rmse"] for t in trials])
    means = table.mean(axis=0).tolist()
    return {
        "kind": "freq",
        "config": {k: v for k, v in c.items() if k != "workers"},
        "estimator": "third-order Diophantine lags, Hankel window floor((K+2)/2), MUSIC",
        "snr_db": c["snr_db"],
        "series": {f"D={c['D']}": means},
        "spearman": {f"D={c['D']}": _trend(c["snr_db"], means)},
        "trials": trials,
    }


@dataclass(frozen=True)
class _DoaJob:
    cfg: dict
    trial: int


def _doa_trial(job: _DoaJob) -> dict:
    c = job.cfg
    p = tuple(int(x) for x in c["p"])
    geo = geometry.dio3_array(*p)
    grid = angle_grid(math.radians(float(c["grid_step_deg"])))
    rng = np.random.default_rng([int(c["seed"]), job.trial])
    scene = DoaScene.random(int(c["D"]), rng, math.radians(float(c["min_sep_deg"])),
                            math.radians(float(c["max_angle_deg"])), bool(c["rotate"]))
    out = {"trial": job.trial, "angles_deg": [math.degrees(a) for a in scene.angles],
           "rotations": list(scene.rotations), "rmse_deg": {}, "noise_seeds": []}
    for si, snr in enumerate(c["snr_db"]):
        ns = NoiseSpec(snr_to_noise_power(snr, scene.mean_power), noise_seed(int(c["seed"]), job.trial, si))
        out["noise_seeds"].append(ns.seed)
        for L in c["L"]:
            X = gen_array_snapshots(geo, scene, int(L), ns)
            v = spatial_dio3(X, p, int(c["K"]))
            spec = music_spectrum(hankel_subspace(v, scene.D), grid, "angle")
            out["rmse_deg"].setdefault(str(L), []).append(math.degrees(rmse(spec.peaks, scene.angles)))
    return out


def _cdf_gap(worse: np.ndarray, better: np.ndarray) -> float:
    """``max_t F_worse(t) - F_better(t)`` over the pooled sample; <= 0 means ``better`` dominates."""
    t = np.union1d(worse, better)
    f_w = np.searchsorted(np.sort(worse), t, side="right") / worse.size
    f_b = np.searchsorted(np.sort(better), t, side="right") / better.size
    return float(np.max(f_w - f_b))


def run_doa(cfg: dict | None = None) -> dict:
    """RMSE (degrees) versus SNR for the third-order array, one series per L."""
    c = _merge(DOA_DEFAULTS, cfg or {})
    c["L"] = [int(x) for x in (c["L"] if isinstance(c["L"], list) else [c["L"]])]
    c["p"] = [int(x) for x in c["p"]]
    trials = _run(_doa_trial, [_DoaJob(c, t) for t in range(int(c["trials"]))], int(c["workers"]))
    series, rho = {}, {}
    for L in c["L"]:
        table = np.array([t["rmse_deg"][str(L)] for t in trials])
        series[f"L={L}"] = table.mean(axis=0).tolist()
        rho[f"L={L}"] = _trend(c["snr_db"], series[f"L={L}"])
    result = {
        "kind": "doa",
        "config": {k: v for k, v in c.items() if k != "workers"},
        "estimator": "third-order spatial lags, Hankel window floor((K+2)/2), MUSIC",
        "snr_db": c["snr_db"],
        "series": series,
        "spearman": rho,
        "trials": trials,
    }
    if len(c["L"]) >= 2:
        lo, hi = min(c["L"]), max(c["L"])
        a = np.array([t["rmse_deg"][str(lo)] for t in trials])
        b = np.array([t["rmse_deg"][str(hi)] for t in trials])
        result["paired_dominance"] = {
            "larger_L": hi,
            "smaller_L": lo,
            "fraction_per_snr": (b <= a).mean(axis=0).tolist(),
            "cdf_gap_per_snr": [_cdf_gap(a[:, i], b[:, i]) for i in range(a.shape[1])],
        }
    return result


def sweep_csv(result: dict) -> str:
    names = list(result["series"])
    lines = ["snr_db," + ",".join(f"rmse_{n.replace('=', '')}" for n in names)]
    for i, snr in enumerate(result["snr_db"]):
        vals = ",".join(format(result["series"][n][i], ".17g") for n in names)
        lines.append(f"{snr:g},{vals}")
    return "\n".join(lines) + "\n"


def _array_row(label: str, geo: coarray.ArrayGeometry, order: int, claims: dict) -> dict:
    lags = geometry.lag_set(geo, order)
    tau = coarray.weight_tau(geo.positions)
    return {
        "array": label,
        "order": order,
        "sensors": geo.size,
        "min_spacing": tau.min_spacing,
        "dof": lags.dof,
        "consecutive_radius": lags.consecutive_radius,
        "distinct_lags": lags.distinct_count,
        "formula": claims,
    }


def table1(gamma: int = 1_000_000, K: int = 50, L: int = 50, n: int = 10) -> dict:
    """Measured counterparts of the summary table, with the closed forms alongside."""
    three = three_sampler_plan(gamma, K, L)
    nplan = n_sampler_plan(n, gamma, K, L)
    cop = coprime_plan(2 + gamma, 3 + gamma, K, L)
    sampling = [
        {"plan": "three-sampler", "rates": list(three.rates), "delay_ticks": three.delay_ticks,
         "bound_ticks": three.delay_bound(),
         "virtual_snapshots_per_lag": three.virtual_snapshots_per_lag},
        {"plan": f"{n}-sampler", "rates": [nplan.rates[0], nplan.rates[-1]],
         "delay_ticks": nplan.delay_ticks, "bound_ticks": nplan.delay_bound(),
         "virtual_snapshots_per_lag": nplan.virtual_snapshots_per_lag,
         "snapshot_floor": nplan.snapshot_floor()},
        {"plan": "co-prime baseline", "rates": list(cop.rates), "delay_ticks": cop.delay_ticks,
         "virtual_snapshots_per_lag": cop.virtual_snapshots_per_lag},
    ]
    arrays = []
    for p in ((4, 3, 5), (13, 7, 11)):
        geo = geometry.dio3_array(*p)
        N = geo.size
        arrays.append(_array_row(geo.label, geo, 3, {
            "min_spacing_d": N / 6, "dof": N**3 / 27 - 1}))
    geo = geometry.fourth_order_array(5, 5, 5, 5, 25, 24)
    N = geo.size
    arrays.append(_array_row(geo.label, geo, 4, {
        "min_spacing_d": 2 * (N / 4 - 0.5) ** 2, "dof": 5 * (N / 4 - 0.5) ** 4}))
    geo = geometry.sixth_order_array([5] * 6, 125, 124)
    N = geo.size
    arrays.append(_array_row(geo.label, geo, 6, {
        "min_spacing_d": (N / 6 - 1) ** 3, "dof": 17 * (N / 6 - 1) ** 6}))
    geo = geometry.coprime_array(4, 5)
    arrays.append(_array_row(geo.label, geo, 2, {}))
    return {
        "params": {"gamma": gamma, "K": K, "L": L, "n": n},
        "sampling": sampling,
        "coprime_over_three_delay_ratio": cop.delay_ticks / three.delay_ticks,
        "arrays": arrays,
    }


HISTOGRAM_ARRAYS = {
    "dio3_13_7_11": lambda: geometry.dio3_array(13, 7, 11),
    "dio3_4_3_5": lambda: geometry.dio3_array(4, 3, 5),
    "nested_18_18": lambda: geometry.nested_array(18, 18),
    "fourth_order_5555_25_24": lambda: geometry.fourth_order_array(5, 5, 5, 5, 25, 24),
    "sixth_order_5x6_125_124": lambda: geometry.sixth_order_array([5] * 6, 125, 124),
}


def fig_histograms() -> dict[str, tuple[coarray.ArrayGeometry, coarray.SpacingHistogram]]:
    out = {}
    for name, make in HISTOGRAM_ARRAYS.items():
        geo = make()
        out[name] = (geo, coarray.weight_tau(geo.positions))
    return out
