import itertools

import pytest

from diosense import coarray, geometry
from diosense.errors import DomainError, NotCoprimeError

from oracles import PROPERTY_SUITES, covers, naive_2q, radius, run_suite


def test_coprime_array_positions():
    g = geometry.coprime_array(3, 5)
    assert g.positions == (0, 3, 5, 6, 9, 10, 12, 15, 18, 21, 24, 27)
    assert coarray.symmetric_difference_2q(g, 1).consecutive_radius >= 14
    with pytest.raises(NotCoprimeError):
        geometry.coprime_array(4, 6)


def test_nested_is_shifted_special_case():
    assert geometry.nested_array(2, 3).positions == geometry.shifted_nested(2, 3, 3, 0).positions
    g = geometry.nested_array(3, 4)
    assert coarray.symmetric_difference_2q(g, 1).consecutive_radius >= (3 + 1) * 4 - 1


def test_shifted_coprime_positions():
    assert geometry.shifted_coprime(2, 3, 2, 2).positions == (0, 2, 3, 4, 6)
    with pytest.raises(NotCoprimeError):
        geometry.shifted_coprime(2, 4, 1, 1)


def test_dio3_examples():
    g = geometry.dio3_array(4, 3, 5)
    assert g.size == 13
    assert g.claims["sensor_count"] == 13
    g = geometry.dio3_array(13, 7, 11)
    assert g.size == 36
    assert geometry.lag_set(g, 3).dof == 2337
    with pytest.raises(NotCoprimeError):
        geometry.dio3_array(2, 4, 3)


@pytest.mark.parametrize("p", [(2, 3, 5), (3, 4, 5), (5, 3, 7), (7, 2, 9)])
def test_dio3_matches_brute_force(p):
    g = geometry.dio3_array(*p)
    plus = {a - b + c for a, b, c in itertools.product(g.positions, repeat=3)}
    signed = plus | {-x for x in plus}
    r = p[0] * p[1] * p[2] - 1
    assert covers(signed, -r, r)
    assert g.size == p[0] + 2 * p[1] + p[2] - 2


def test_fourth_order_example():
    g = geometry.fourth_order_array(5, 5, 5, 5, 25, 24)
    assert coarray.weight_tau(g).min_spacing == 12
    assert g.claims["raw_count"] == 24
    assert g.size == 22
    assert geometry.order_radius(g, 4) >= 1500


def test_fourth_order_preconditions():
    with pytest.raises(DomainError, match="N1\\*N2"):
        geometry.fourth_order_array(2, 2, 5, 5, 5, 4)
    with pytest.raises(NotCoprimeError):
        geometry.fourth_order_array(5, 5, 5, 5, 6, 4)


def test_fourth_order_small_cases_brute_force():
    for n1, n2, n3, n4 in [(2, 2, 2, 2), (2, 3, 3, 2), (3, 3, 2, 3)]:
        for m1 in range(2, n1 * n2 + 1):
            for m2 in range(2, n3 * n4 + 1):
                try:
                    g = geometry.fourth_order_array(n1, n2, n3, n4, m1, m2)
                except NotCoprimeError:
                    continue
                lags = naive_2q(g.positions, 2)
                assert radius(lags) >= geometry.fourth_order_mmax(m1, m2), (n1, n2, n3, n4, m1, m2)


def test_sixth_order_small_case():
    g = geometry.sixth_order_array([2] * 6, 8, 7)
    assert geometry.order_radius(g, 6) >= geometry.sixth_order_mmax(8, 7) == 476
    with pytest.raises(DomainError):
        geometry.sixth_order_array([2] * 6, 8, 8 * 1)


def test_layer_examples():
    one = geometry.ArrayGeometry.from_positions([0, 1])
    g = geometry.layer(one, 1, 1, one, 1, 1)
    assert covers(naive_2q(g.positions, 2), -3, 3)
    ruler = geometry.ArrayGeometry.from_positions([0, 1, 3])
    g = geometry.layer(ruler, 1, 3, one, 1, 1)
    assert covers(naive_2q(g.positions, 2), -9, 9)
    zero = geometry.ArrayGeometry.from_positions([0])
    g = geometry.layer(ruler, 1, 3, zero, 1, 0)
    assert covers(naive_2q(g.positions, 2), -3, 3)
    with pytest.raises(DomainError):
        geometry.layer(ruler, 1, 4, one, 1, 1)


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_build_2q_coverage(q):
    g = geometry.build_2q_array(q)
    assert geometry.order_radius(g, 2 * q) >= g.claims["consecutive_radius"]


def test_build_dispatch():
    assert geometry.build("dio3", [4, 3, 5]).size == 13
    with pytest.raises(DomainError):
        geometry.build("triangle", [1])
    with pytest.raises(DomainError):
        geometry.build("dio3", [4, 3])


@pytest.mark.parametrize("name", sorted(PROPERTY_SUITES))
def test_coverage_property_suites(name):
    assert run_suite(PROPERTY_SUITES[name], 60, seed=11) == []
