"""Exact arithmetic in the lattice L and its dual L'.

Cycles are :class:`~plumb.cycles.Cycle` values indexed by vertex ids.  All
linear solves run leaves-first on the tree, so they are exact and linear in
the number of vertices.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from fractions import Fraction
from functools import lru_cache

from .cycles import Cycle
from .errors import IndexMismatch, NotInLprime
from .graph import BlowdownData, PlumbingGraph, elimination_order


def _check(g: PlumbingGraph, *cs: Mapping) -> None:
    for c in cs:
        for v in c:
            if v not in g.weight:
                raise IndexMismatch(f"cycle uses vertex {v} not in graph {g.name!r}", {"vertex": v})


def pairing(g: PlumbingGraph, a: Mapping, b: Mapping):
    """The intersection form ``(a, b)``."""
    _check(g, a, b)
    w, adj = g.weight, g.adj
    total = 0
    for v, av in a.items():
        if not av:
            continue
        s = w[v] * b.get(v, 0)
        for u in adj[v]:
            s += b.get(u, 0)
        total += av * s
    return _norm(total)


def degree(g: PlumbingGraph, c: Mapping, v: int):
    """``(c, E_v)``."""
    s = g.weight[v] * c.get(v, 0)
    for u in g.adj[v]:
        s += c.get(u, 0)
    return _norm(s)


def degrees(g: PlumbingGraph, c: Mapping, vs: Iterable[int] | None = None) -> dict:
    vs = g.ids if vs is None else vs
    return {v: degree(g, c, v) for v in vs}


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def solve(g: PlumbingGraph, rhs: Mapping) -> Cycle:
    """The unique ``x`` with ``(x, E_v) = rhs_v`` for every vertex."""
    order = elimination_order(g)
    pos = {v: i for i, v in enumerate(order)}
    parent: dict[int, int | None] = {}
    piv: dict[int, Fraction] = {}
    r: dict[int, Fraction] = {}
    for v in order:
        p = Fraction(g.weight[v])
        b = Fraction(rhs.get(v, 0))
        parent[v] = None
        for c in g.adj[v]:
            if pos[c] < pos[v]:
                p -= 1 / piv[c]
                b -= r[c] / piv[c]
            else:
                parent[v] = c
        piv[v], r[v] = p, b
    x: dict[int, Fraction] = {}
    for v in reversed(order):
        up = parent[v]
        x[v] = (r[v] - (x[up] if up is not None else 0)) / piv[v]
    return Cycle(x)


@lru_cache(maxsize=None)
def _dual(g: PlumbingGraph, v: int) -> Cycle:
    return solve(g, {v: -1})


def dual_basis(g: PlumbingGraph, v: int) -> Cycle:
    """``E*_v``: the class with ``(E*_v, E_w) = -δ_vw``."""
    g.require([v])
    return _dual(g, v)


@lru_cache(maxsize=None)
def _zk(g: PlumbingGraph) -> Cycle:
    # adjunction: (Z_K, E_v) = E_v^2 + 2
    return solve(g, {v: e + 2 for v, e in g.weight.items()})


def canonical_cycle(g: PlumbingGraph) -> Cycle:
    return _zk(g)


def chi(g: PlumbingGraph, l: Mapping):
    """Riemann-Roch ``χ(l) = -(l, l - Z_K)/2``."""
    l = Cycle(l)
    _check(g, l)
    if l.is_integral():
        return chi_int(g, l)
    return _norm(Fraction(-(pairing(g, l, l - _zk(g)))) / 2)


def chi_int(g: PlumbingGraph, l: Mapping) -> int:
    """χ on integral cycles, without touching Z_K.

    Uses ``(Z_K, E_v) = E_v^2 + 2``, so
    χ(l) = Σ_v (l_v - e_v·l_v(l_v-1)/2) - Σ_edges l_u·l_w.
    """
    w = g.weight
    s = 0
    for v, x in l.items():
        s += x - w[v] * (x * (x - 1) // 2)
    for u, v in g.edges:
        s -= l.get(u, 0) * l.get(v, 0)
    return s


def in_lprime(g: PlumbingGraph, c: Mapping, vs: Iterable[int] | None = None) -> bool:
    return all(isinstance(d, int) for d in degrees(g, c, vs).values())


def require_lprime(g: PlumbingGraph, c: Mapping, vs: Iterable[int] | None = None) -> None:
    for v, d in degrees(g, c, vs).items():
        if not isinstance(d, int):
            raise NotInLprime(f"({c!r}, E_{v}) = {d} is not an integer", {"vertex": v, "pairing": str(d)})


def chi_bundle(g: PlumbingGraph, Z: Mapping, Zp: Mapping) -> int:
    """χ of a line bundle on ``Z`` with Chern class ``R(Z')``: χ(Z) + (Z', Z)."""
    Z = Cycle(Z)
    _check(g, Z, Zp)
    total = chi_int(g, Z)
    for v, zv in Z.items():
        d = degree(g, Zp, v)
        if not isinstance(d, int):
            raise NotInLprime(f"(Z', E_{v}) = {d} is not an integer", {"vertex": v, "pairing": str(d)})
        total += zv * d
    return total


def neg_lipman_member(g: PlumbingGraph, S: Iterable[int], Zp: Mapping) -> bool:
    """True iff ``(Z', E_v) >= 0`` for all ``v`` in ``S``."""
    S = list(S)
    g.require(S)
    return all(degree(g, Zp, v) >= 0 for v in S)


def pullback(bd: BlowdownData, c: Mapping) -> Cycle:
    """Total transform of a cycle under the blowup ``bd``."""
    c = Cycle(c)
    new = sum(c[v] for v in bd.point)
    return c + Cycle({bd.new_vertex: new})
