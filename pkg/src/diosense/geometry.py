"""Constructors for every array family, with claim metadata.

Subarrays that collide are merged (two sensors cannot share a location);
``claims["raw_count"]`` keeps the pre-merge total. Claimed spacings and
DoF formulas are stored as metadata only; checks always measure.
"""

from __future__ import annotations

import math
from typing import Sequence

from . import coarray
from .coarray import ArrayGeometry
from .errors import DomainError, NotCoprimeError

FAMILIES = (
    "coprime", "nested", "shifted_nested", "shifted_coprime",
    "dio3", "fourth_order", "sixth_order", "layered_2q",
)


def _require_coprime(m1: int, m2: int) -> None:
    if math.gcd(m1, m2) != 1:
        raise NotCoprimeError(f"gcd({m1}, {m2}) = {math.gcd(m1, m2)} != 1")


def _subarray_union(label: str, subarrays: dict[str, list[int]], claims: dict) -> ArrayGeometry:
    raw = [p for sub in subarrays.values() for p in sub]
    claims = dict(claims)
    claims["raw_count"] = len(raw)
    claims["subarrays"] = {k: list(v) for k, v in subarrays.items()}
    geo = ArrayGeometry.from_positions(raw, label, claims)
    geo.claims["merged_count"] = geo.size
    return geo


def coprime_array(m1: int, m2: int) -> ArrayGeometry:
    """``{M2*k : k=1..M1-1}`` united with ``{M1*k : k=0..2*M2-1}``."""
    if m1 < 2 or m2 < 2:
        raise DomainError(f"co-prime rates must be >= 2, got ({m1}, {m2})")
    _require_coprime(m1, m2)
    subs = {
        "sparse_m2": [m2 * k for k in range(1, m1)],
        "dense_m1": [m1 * k for k in range(2 * m2)],
    }
    return _subarray_union(f"coprime({m1},{m2})", subs,
                           {"order": 2, "consecutive_radius": m1 * m2 - 1})


def shifted_nested(n1: int, n2: int, delta1: int = 0, delta2: int = 0) -> ArrayGeometry:
    """``{n*N2 + delta1 : n=0..N1}`` united with ``{n + delta2 : n=0..N2}``."""
    if n1 < 1 or n2 < 1:
        raise DomainError(f"need N1, N2 >= 1, got ({n1}, {n2})")
    subs = {
        "sparse": [k * n2 + delta1 for k in range(n1 + 1)],
        "dense": [k + delta2 for k in range(n2 + 1)],
    }
    return _subarray_union(f"shifted_nested({n1},{n2},{delta1},{delta2})", subs,
                           {"order": 2})


def nested_array(n1: int, n2: int) -> ArrayGeometry:
    """Two-level nested array: the shifted form with ``delta1 = N2, delta2 = 0``."""
    geo = shifted_nested(n1, n2, n2, 0)
    return ArrayGeometry(geo.positions, f"nested({n1},{n2})",
                         {**geo.claims, "consecutive_radius": (n1 + 1) * n2})


def shifted_coprime(m1: int, m2: int, n1: int, n2: int,
                    delta1: int = 0, delta2: int = 0) -> ArrayGeometry:
    """``{(n+delta1)*M1 : n=0..N1}`` united with ``{(n+delta2)*M2 : n=0..N2}``."""
    _require_coprime(m1, m2)
    if n1 < 0 or n2 < 0:
        raise DomainError(f"need N1, N2 >= 0, got ({n1}, {n2})")
    subs = {
        "s1": [(k + delta1) * m1 for k in range(n1 + 1)],
        "s2": [(k + delta2) * m2 for k in range(n2 + 1)],
    }
    return _subarray_union(f"shifted_coprime({m1},{m2},{n1},{n2},{delta1},{delta2})",
                           subs, {"order": 2})


def dio3_array(p1: int, p2: int, p3: int) -> ArrayGeometry:
    """Third-order array built on three co-prime factors.

    With ``M1 = p3*p1``, ``M2 = p3*p2``, ``M3 = p1*p2`` the sensors sit at
    ``m1*M1`` (m1 < 2*p2), ``m2*M2`` (m2 < p1) and ``m3*M3`` (m3 < p3). The
    signed triple set then holds every integer in ``[-(p1p2p3-1), p1p2p3-1]``.
    """
    ps = (p1, p2, p3)
    if min(ps) < 2:
        raise DomainError(f"factors must be >= 2, got {ps}")
    for x, y in ((p1, p2), (p2, p3), (p1, p3)):
        _require_coprime(x, y)
    m1, m2, m3 = p3 * p1, p3 * p2, p1 * p2
    subs = {
        "m1": [k * m1 for k in range(2 * p2)],
        "m2": [k * m2 for k in range(p1)],
        "m3": [k * m3 for k in range(p3)],
    }
    claims = {
        "order": 3,
        "params": {"p1": p1, "p2": p2, "p3": p3},
        "sensor_count": p1 + 2 * p2 + p3 - 2,
        "consecutive_radius": p1 * p2 * p3 - 1,
        "min_spacing_note": "asymptotically N*lambda/12 (= N*d/6)",
    }
    return _subarray_union(f"dio3({p1},{p2},{p3})", subs, claims)


def fourth_order_mmax(m1: int, m2: int) -> int:
    """Guaranteed fourth-order radius: ``floor(5*M1*M2/2)``, minus ``M2`` for odd ``M2``."""
    base = (5 * m1 * m2) // 2
    return base if m2 % 2 == 0 else base - m2


def fourth_order_array(n1: int, n2: int, n3: int, n4: int, m1: int, m2: int) -> ArrayGeometry:
    """Shifted fourth-order array from two shifted nested pairs on co-prime scales."""
    _require_coprime(m1, m2)
    if min(n1, n2, n3, n4) < 1:
        raise DomainError("N1..N4 must be >= 1")
    if m1 > n1 * n2:
        raise DomainError(f"M1 <= N1*N2 violated: {m1} > {n1 * n2}")
    if m2 > n3 * n4:
        raise DomainError(f"M2 <= N3*N4 violated: {m2} > {n3 * n4}")
    h1, h2 = m1 // 2, m2 // 2
    subs = {
        "M11": [(k * n2 + m2) * m1 for k in range(n1 + 1)],
        "M12": [(k + h2) * m1 for k in range(n2 + 1)],
        "M21": [(k * n4 - h1) * m2 for k in range(n3 + 1)],
        "M22": [(k - h1) * m2 for k in range(n4 + 1)],
    }
    claims = {
        "order": 4,
        "params": {"N": [n1, n2, n3, n4], "M1": m1, "M2": m2},
        "consecutive_radius": fourth_order_mmax(m1, m2),
        "mmax_rule": "floor(5*M1*M2/2) when M2 is even, minus M2 when M2 is odd",
    }
    return _subarray_union(f"fourth_order({n1},{n2},{n3},{n4},{m1},{m2})", subs, claims)


def sixth_order_mmax(m1: int, m2: int) -> int:
    return (17 * m1 * m2) // 2


def sixth_order_array(ns: Sequence[int], m1: int, m2: int) -> ArrayGeometry:
    """Shifted sixth-order array; ``ns`` holds ``N1..N6``."""
    if len(ns) != 6:
        raise DomainError(f"need six block sizes, got {len(ns)}")
    n1, n2, n3, n4, n5, n6 = ns
    _require_coprime(m1, m2)
    if min(ns) < 1:
        raise DomainError("N1..N6 must be >= 1")
    if m1 > n1 * n2 * n3:
        raise DomainError(f"M1 <= N1*N2*N3 violated: {m1} > {n1 * n2 * n3}")
    if m2 >= n4 * n5 * n6:
        raise DomainError(f"M2 < N4*N5*N6 violated: {m2} >= {n4 * n5 * n6}")
    subs = {
        "M11": [k * n2 * n3 * m1 for k in range(n1 + 1)],
        "M12": [(k * n3 + m2) * m1 for k in range(n2 + 1)],
        "M13": [(k + (3 * m2) // 2) * m1 for k in range(n3 + 1)],
        "M21": [(k * n5 * n6 - (5 * m1) // 2) * m2 for k in range(n4 + 1)],
        "M22": [(k * n6 - (7 * m1) // 2) * m2 for k in range(n5 + 1)],
        "M23": [(k - 5 * m1) * m2 for k in range(n6 + 1)],
    }
    claims = {
        "order": 6,
        "params": {"N": list(ns), "M1": m1, "M2": m2},
        "consecutive_radius": sixth_order_mmax(m1, m2),
    }
    label = "sixth_order({},{},{})".format(",".join(map(str, ns)), m1, m2)
    return _subarray_union(label, subs, claims)


def order_radius(S: ArrayGeometry, order: int) -> int:
    """Measured consecutive radius of the order-``order`` lag set."""
    return coarray.consecutive_radius(lag_set(S, order))


def lag_set(S: ArrayGeometry, order: int) -> coarray.LagSet:
    """Lag set at a given order: 3 is the signed triple set, even orders are 2q sets."""
    if order == 3:
        return coarray.third_order_signed_set(S)
    if order >= 2 and order % 2 == 0:
        return coarray.symmetric_difference_2q(S, order // 2)
    raise DomainError(f"unsupported order {order}; use 3 or an even order >= 2")


def layer(s1: ArrayGeometry, q1: int, mu1: int,
          s2: ArrayGeometry, q2: int, mu2: int) -> ArrayGeometry:
    """Union of ``S1`` with ``S2`` scaled by ``2*mu1``.

    Both coverage preconditions are verified first. The result covers
    ``[-(2*mu1*mu2 + mu1), 2*mu1*mu2 + mu1]`` at order ``2*(q1 + q2)``.
    """
    for name, S, q, mu in (("S1", s1, q1, mu1), ("S2", s2, q2, mu2)):
        if q < 1 or mu < 0:
            raise DomainError(f"{name}: need q >= 1 and mu >= 0")
        have = coarray.symmetric_difference_2q(S, q).consecutive_radius
        if have < mu:
            raise DomainError(
                f"{name} covers [-{have}, {have}] at order {2 * q}, not [-{mu}, {mu}]")
    scaled = [2 * b * mu1 for b in s2.positions]
    radius = 2 * mu1 * mu2 + mu1
    claims = {
        "order": 2 * (q1 + q2),
        "consecutive_radius": radius,
        "layers": [s1.label, s2.label],
    }
    geo = ArrayGeometry.from_positions(list(s1.positions) + scaled,
                                       f"layer[{s1.label} | 2*{mu1}*{s2.label}]", claims)
    geo.claims["merged_count"] = geo.size
    return geo


def _default_block(kind: int, n: int, mpair):
    if kind == 6:
        m1, m2 = mpair or (n ** 3, n ** 3 - 1)
        return sixth_order_array([n] * 6, m1, m2), 3
    if kind == 4:
        m1, m2 = mpair or (n ** 2, n ** 2 - 1)
        return fourth_order_array(n, n, n, n, m1, m2), 2
    return nested_array(n, n), 1


def build_2q_array(q: int, block_sizes: Sequence[int] | None = None,
                   m_pairs: Sequence[tuple[int, int] | None] | None = None) -> ArrayGeometry:
    """Compose a 2q-th order array from sixth/fourth/nested blocks by layering.

    ``2q`` is split into sixth-order blocks, plus one fourth-order block when
    ``2q = 4 (mod 6)`` or one nested block when ``2q = 2 (mod 6)``.
    ``block_sizes[i]`` is the uniform N of block i (default 2) and
    ``m_pairs[i]`` its ``(M1, M2)`` (default the largest co-prime pair the
    block allows).
    """
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    kinds = [6] * (q // 3)
    rem = (2 * q) % 6
    if rem == 4:
        kinds.append(4)
    elif rem == 2:
        kinds.append(2)
    nblocks = len(kinds)
    block_sizes = list(block_sizes) if block_sizes is not None else [2] * nblocks
    m_pairs = list(m_pairs) if m_pairs is not None else [None] * nblocks
    if len(block_sizes) != nblocks or len(m_pairs) != nblocks:
        raise DomainError(f"2q={2 * q} needs {nblocks} blocks {kinds}, "
                          f"got {len(block_sizes)} sizes and {len(m_pairs)} M pairs")
    if min(block_sizes) < 2:
        raise DomainError("block sizes must be >= 2")

    blocks = [_default_block(k, n, mp) for k, n, mp in zip(kinds, block_sizes, m_pairs)]
    geo, q_acc = blocks[0]
    mu = coarray.symmetric_difference_2q(geo, q_acc).consecutive_radius
    for blk, qb in blocks[1:]:
        mu_b = coarray.symmetric_difference_2q(blk, qb).consecutive_radius
        geo = layer(geo, q_acc, mu, blk, qb, mu_b)
        mu = 2 * mu * mu_b + mu
        q_acc += qb
    n_total = geo.size
    claims = dict(geo.claims)
    claims.update({
        "order": 2 * q,
        "consecutive_radius": mu,
        "blocks": kinds,
        "predicted_dof_order": "O(17^(q/3) (N/2q)^(2q))",
        "predicted_dof_value": 17 ** (q / 3) * (n_total / (2 * q)) ** (2 * q),
    })
    return ArrayGeometry(geo.positions, f"layered_2q(q={q}):{geo.label}", claims)


def build(family: str, params: Sequence[int]) -> ArrayGeometry:
    """Dispatch on a family name with positional integer parameters."""
    p = [int(x) for x in params]
    try:
        if family == "coprime":
            return coprime_array(*p)
        if family == "nested":
            return nested_array(*p)
        if family == "shifted_nested":
            return shifted_nested(*p)
        if family == "shifted_coprime":
            return shifted_coprime(*p)
        if family == "dio3":
            return dio3_array(*p)
        if family == "fourth_order":
            return fourth_order_array(*p)
        if family == "sixth_order":
            return sixth_order_array(p[:6], *p[6:])
        if family == "layered_2q":
            q, *sizes = p
            return build_2q_array(q, sizes or None)
    except TypeError as exc:
        raise DomainError(f"bad parameter count for {family}: {exc}") from None
    raise DomainError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
