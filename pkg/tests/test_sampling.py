import math

import numpy as np
import pytest

from diosense.errors import DomainError, NotCoprimeError, ResourceLimitError
from diosense.numtheory import solve_dio3_zero_sum
from diosense.sampling import (
    SamplingPlan,
    coprime_plan,
    degeneracy_check,
    n_sampler_plan,
    three_sampler_plan,
)


def test_three_sampler_indices():
    plan = three_sampler_plan(0, 4, 3)
    assert plan.rates == (2, 3, 5)
    k, ell = 3, np.arange(1, 4)
    rows = plan.tuples(k)
    assert rows.tolist() == np.stack([k + 2 * ell, 2 * k + 3 * ell, k + ell], axis=1).tolist()


@pytest.mark.parametrize("gamma", [0, 7, 10**6])
def test_three_sampler_every_tuple_hits_its_lag(gamma):
    plan = three_sampler_plan(gamma, 12, 9)
    for k in range(plan.K + 1):
        assert {plan.lag_of(r) for r in plan.tuples(k).tolist()} == {k}


def test_three_sampler_delay_example():
    plan = three_sampler_plan(10**6, 50, 50)
    assert plan.delay_ticks == 250000750
    assert plan.delay_bound() == 250001250
    assert plan.delay_seconds(1e-9) == pytest.approx(0.25000075)


def test_three_sampler_delay_within_bound_sweep():
    for gamma in (0, 3, 1000):
        for K in (1, 5, 40):
            for L in (1, 6, 40):
                plan = three_sampler_plan(gamma, K, L)
                assert plan.delay_ticks <= plan.delay_bound()
                # the analytic delay matches the one derived from materialized instants
                assert plan.delay_ticks == SamplingPlan.delay_ticks.func(plan)


def test_stream_lengths_match_instants():
    for plan in (three_sampler_plan(2, 9, 7), n_sampler_plan(6, 3, 5, 4)):
        derived = SamplingPlan.stream_lengths.func(plan)
        assert plan.stream_lengths == derived


def test_n_sampler_example():
    plan = n_sampler_plan(10, 100, 10, 10)
    assert plan.virtual_snapshots_per_lag_dedup == 940
    assert plan.snapshot_floor() == 729
    assert plan.delay_ticks == 17340 <= plan.delay_bound() == 39600
    assert len(plan.groups) == 94
    for g in range(len(plan.groups)):
        for k in (0, 4, 10):
            assert {plan.lag_of(r, g) for r in plan.tuples(k, g).tolist()} == {k}


@pytest.mark.parametrize("n,gamma", [(3, 0), (5, 11), (8, 1000), (12, 5)])
def test_n_sampler_bounds(n, gamma):
    plan = n_sampler_plan(n, gamma, 6, 5)
    assert plan.virtual_snapshots_per_lag_dedup >= plan.snapshot_floor()
    assert plan.delay_ticks <= plan.delay_bound()


def test_coprime_plan_windows_and_lags():
    plan = coprime_plan(3, 5, 15, 6)
    for k in range(plan.K + 1):
        for r, (m1, m2) in enumerate(plan.tuples(k).tolist()):
            assert plan.lag_of((m1, m2)) == k
            (lo1, hi1), (lo2, hi2) = plan.window_bounds(r)
            assert lo1 <= m1 < hi1 and lo2 <= m2 < hi2
    assert plan.delay_ticks == SamplingPlan.delay_ticks.func(plan)


def test_coprime_plan_errors():
    with pytest.raises(NotCoprimeError):
        coprime_plan(4, 6, 3, 3)
    with pytest.raises(DomainError):
        coprime_plan(3, 5, 16, 3)
    with pytest.raises(DomainError):
        three_sampler_plan(-1, 3, 3)
    with pytest.raises(DomainError):
        three_sampler_plan(0, 3, 2).tuples(4)


def test_lag_map_limits():
    plan = three_sampler_plan(0, 2000, 3000)
    with pytest.raises(ResourceLimitError):
        plan.lag_map()
    s = plan.summary()
    assert s["physical_samples"] is None
    assert s["delay_ticks"] == plan.delay_ticks
    small = three_sampler_plan(0, 2, 2).to_dict()
    assert small["lag_map"]["1"] == [[3, 5, 2], [5, 8, 3]]


def test_degeneracy_check():
    sol = solve_dio3_zero_sum(2, 3, 5)
    assert degeneracy_check(sol, [0.3, 1.1]).ok
    # a2 M2 = -9, so two tones 2 pi / 3 apart rotate by a multiple of 2 pi
    bad = degeneracy_check(sol, [0.0, 2 * math.pi / 3])
    assert not bad.ok and bad.min_margin < 1e-12
    with pytest.raises(DomainError):
        degeneracy_check(sol, [0.2, 0.2])
