"""Closed-form topological invariants built on box minimisation.

All functions take an optional ``engine`` understood by :mod:`plumb.latopt`.
Whenever the descent engine cannot certify its answer the exact tree
programme is used instead, so returned values never depend on the engine.
"""

from __future__ import annotations

import itertools
import logging
from functools import lru_cache

import numpy as np

from . import latopt
from .cycles import Cycle, ZERO, basis, reduced
from .errors import BoxTooLarge, EmptyImage, InputError, NotEffective, SupportTooLarge
from .graph import PlumbingGraph, components
from .lattice import chi_int, degree, neg_lipman_member, require_lprime
from .latopt import BoxSpec, MinResult

log = logging.getLogger(__name__)

SUBSET_BOUND = 16


def _effective(g: PlumbingGraph, Z) -> Cycle:
    Z = Cycle(Z)
    g.require(Z)
    if not Z.is_integral():
        raise NotEffective(f"cycle {Z!r} is not integral")
    if not Z.is_effective():
        raise NotEffective(f"cycle {Z!r} has negative coefficients")
    return Z


def minimise(g: PlumbingGraph, spec: BoxSpec, engine: str = "exhaustive", budget=None) -> MinResult:
    r = latopt.min_box(g, spec, engine, budget)
    if r.unverified:
        log.warning("descent result %s not certified; using tree DP", r.value)
        r = latopt.min_box(g, spec, "treedp")
    return r


# ----------------------------------------------------------------------
# structure sheaf


@lru_cache(maxsize=1 << 16)
def _h1_component(g: PlumbingGraph, Z: Cycle, engine: str, budget) -> int:
    E = reduced(Z.support)
    return chi_int(g, E) - minimise(g, BoxSpec(E, Z), engine, budget).value


def h1_struct(g: PlumbingGraph, Z, engine: str = "exhaustive", budget=None, split: bool = True) -> int:
    """``χ(E_|Z|) - min_{E_|Z| <= l <= Z} χ(l)``; 0 for the zero cycle.

    With ``split`` the minimum is taken per connected component of ``|Z|``
    (the box factorises), otherwise over the whole box at once.
    """
    Z = _effective(g, Z)
    if not Z:
        return 0
    if not split:
        E = reduced(Z.support)
        return chi_int(g, E) - minimise(g, BoxSpec(E, Z), engine, budget).value
    return sum(_h1_component(g, Z.restrict(c), engine, budget) for c in components(g, Z.support))


def h1_struct_witness(g: PlumbingGraph, Z, engine: str = "exhaustive", budget=None) -> tuple[int, MinResult | None]:
    Z = _effective(g, Z)
    if not Z:
        return 0, None
    E = reduced(Z.support)
    r = minimise(g, BoxSpec(E, Z), engine, budget)
    return chi_int(g, E) - r.value, r


@lru_cache(maxsize=256)
def _h1_table(g: PlumbingGraph, Z: Cycle) -> tuple[tuple[int, ...], np.ndarray]:
    axes = tuple(sorted(Z.support))
    table = np.zeros([Z[v] + 1 for v in axes], dtype=np.int64)
    for k in range(1, len(axes) + 1):
        for S in itertools.combinations(axes, k):
            E = reduced(S)
            _, f = latopt.grid(g, BoxSpec(E, Z.restrict(S)))
            m = f
            for ax in range(m.ndim):
                m = np.minimum.accumulate(m, axis=ax)
            m = chi_int(g, E) - m.reshape([Z[v] for v in S])
            index = tuple(slice(1, None) if v in S else 0 for v in axes)
            table[index] = m
    table.setflags(write=False)
    return axes, table


def h1_struct_table(g: PlumbingGraph, Z) -> tuple[tuple[int, ...], np.ndarray]:
    """``h1_struct(Z1)`` for every ``0 <= Z1 <= Z`` in one vectorised pass.

    Returns the support of ``Z`` (sorted) and an array indexed by the
    coefficients of ``Z1`` along those vertices.  Each support pattern is
    handled by a prefix-minimum sweep over the exhaustive grid of χ.
    """
    Z = _effective(g, Z)
    if len(Z) > SUBSET_BOUND:
        raise SupportTooLarge(f"support of size {len(Z)} exceeds {SUBSET_BOUND}")
    return _h1_table(g, Z)


def artin_rational(g: PlumbingGraph, engine: str = "exhaustive", budget=None) -> bool:
    """``χ(l) >= 1`` for every effective ``l > 0``, via one unbounded minimum per ``l_v >= 1``."""
    return all(v >= 1 for v in artin_minima(g, engine, budget).values())


def artin_minima(g: PlumbingGraph, engine: str = "exhaustive", budget=None) -> dict[int, int]:
    return {v: _unbounded(g, basis(v), engine, budget).value for v in g.ids}


def _unbounded(g, lower, engine, budget) -> MinResult:
    # enumeration past the budget switches to the exact tree DP
    try:
        r = latopt.min_unbounded(g, lower, engine=engine, budget=budget)
    except BoxTooLarge:
        if engine == "treedp":
            raise
        log.info("unbounded minimum on %s exceeds the budget; using tree DP", g.name)
        return latopt.min_unbounded(g, lower, engine="treedp")
    if r.unverified:
        r = latopt.min_unbounded(g, lower, engine="treedp")
    return r


def pg(g: PlumbingGraph, engine: str = "exhaustive", budget=None) -> int:
    return pg_witness(g, engine, budget)[0]


def pg_witness(g: PlumbingGraph, engine: str = "exhaustive", budget=None) -> tuple[int, MinResult]:
    E = reduced(g.ids)
    r = _unbounded(g, E, engine, budget)
    return chi_int(g, E) - r.value, r


# ----------------------------------------------------------------------
# generic line bundles and Abel images


def h1_gen_bundle(g: PlumbingGraph, Z, Zp, engine: str = "exhaustive", budget=None) -> int:
    """h¹ of a generic bundle with Chern class ``R(Zp)`` on ``Z``: ``-min_{0<=l<=Z} (χ(l) + (Zp, l))``."""
    return h1_gen_bundle_witness(g, Z, Zp, engine, budget)[0]


def h1_gen_bundle_witness(g, Z, Zp, engine="exhaustive", budget=None) -> tuple[int, MinResult]:
    Z = _effective(g, Z)
    Zp = Cycle(Zp)
    g.require(Zp)
    require_lprime(g, Zp, Z.support)
    r = _gen_min(g, Z, Zp, engine, budget)
    return -r.value, r


@lru_cache(maxsize=1 << 16)
def _gen_min(g, Z, Zp, engine, budget) -> MinResult:
    # only the pairings on |Z| matter
    return minimise(g, BoxSpec(ZERO, Z, frozenset(), Zp), engine, budget)


def _abel_terms(g: PlumbingGraph, Z: Cycle, Zp: Cycle):
    Z = _effective(g, Z)
    Zp = Cycle(Zp)
    g.require(Zp)
    require_lprime(g, Zp, Z.support)
    if not neg_lipman_member(g, Z.support, Zp):
        bad = [v for v in sorted(Z.support) if degree(g, Zp, v) < 0]
        raise EmptyImage(f"(Z', E_v) < 0 at vertices {bad}", {"vertices": bad})
    axes, table = h1_struct_table(g, Z)
    r = int(table[tuple(Z[v] for v in axes)]) if axes else 0
    terms = np.zeros(table.shape, dtype=np.int64)
    for i, v in enumerate(axes):
        shape = [1] * len(axes)
        shape[i] = -1
        terms = terms + degree(g, Zp, v) * np.arange(Z[v] + 1, dtype=np.int64).reshape(shape)
    return axes, terms + r - table, r


def _argmin_cycle(axes, arr) -> tuple[int, Cycle]:
    flat = arr.reshape(-1)
    i = int(np.argmin(flat))
    idx = np.unravel_index(i, arr.shape)
    return int(flat[i]), Cycle({v: int(k) for v, k in zip(axes, idx)})


def dim_im(g: PlumbingGraph, Z, Zp) -> int:
    """``min_{0<=Z1<=Z} (Zp, Z1) + h1(Z) - h1(Z1)``; requires ``(Zp, E_v) >= 0`` on ``|Z|``."""
    return dim_im_witness(g, Z, Zp)[0]


def dim_im_witness(g, Z, Zp) -> tuple[int, Cycle]:
    axes, terms, _ = _abel_terms(g, Cycle(Z), Zp)
    return _argmin_cycle(axes, terms)


def vdim(g: PlumbingGraph, Z, Zp, v: int) -> int:
    """Stabilised ``dim Im`` for ``Zp - N·E*_v``, N large: the ``dim_im`` minimum over ``(Z1)_v = 0``."""
    return vdim_witness(g, Z, Zp, v)[0]


def vdim_witness(g, Z, Zp, v) -> tuple[int, Cycle]:
    Z = Cycle(Z)
    g.require([v])
    if v not in Z.support:
        raise InputError(f"vertex {v} is not in the support of Z")
    axes, terms, _ = _abel_terms(g, Z, Zp)
    i = axes.index(v)
    sub = np.take(terms, [0], axis=i)
    return _argmin_cycle(axes, sub)


# ----------------------------------------------------------------------
# supports


def droppable_vertices(g: PlumbingGraph, Z, engine: str = "exhaustive", budget=None) -> frozenset:
    """Vertices ``v`` of ``|Z|`` whose removal keeps ``h1_struct`` unchanged."""
    Z = _effective(g, Z)
    r = h1_struct(g, Z, engine, budget)
    return frozenset(v for v in Z.support if h1_struct(g, Z.drop([v]), engine, budget) == r)


def minimal_supports(g: PlumbingGraph, Z, engine: str = "exhaustive", budget=None,
                     bound: int = SUBSET_BOUND) -> list[frozenset]:
    """All cardinality-minimal ``I ⊆ |Z|`` with ``h1_struct(Z|_I) = h1_struct(Z)``, lexicographically."""
    Z = _effective(g, Z)
    if len(Z) > bound:
        raise SupportTooLarge(f"support of size {len(Z)} exceeds subset bound {bound}",
                              {"size": len(Z), "bound": bound})
    r = h1_struct(g, Z, engine, budget)
    vs = sorted(Z.support)
    for k in range(len(vs) + 1):
        found = [frozenset(I) for I in itertools.combinations(vs, k)
                 if h1_struct(g, Z.restrict(I), engine, budget) == r]
        if found:
            return found
    raise AssertionError("full support always qualifies")  # pragma: no cover


def minimal_support(g: PlumbingGraph, Z, engine: str = "exhaustive", budget=None,
                    bound: int = SUBSET_BOUND) -> frozenset:
    """Smallest ``I ⊆ |Z|`` keeping ``h1_struct``; ties go to the smallest sorted id tuple."""
    Z = _effective(g, Z)
    if len(Z) > bound:
        raise SupportTooLarge(f"support of size {len(Z)} exceeds subset bound {bound}",
                              {"size": len(Z), "bound": bound})
    r = h1_struct(g, Z, engine, budget)
    vs = sorted(Z.support)
    for k in range(len(vs) + 1):
        for I in itertools.combinations(vs, k):
            if h1_struct(g, Z.restrict(I), engine, budget) == r:
                return frozenset(I)
    raise AssertionError("full support always qualifies")  # pragma: no cover


def clear_caches() -> None:
    _h1_component.cache_clear()
    _h1_table.cache_clear()
    _gen_min.cache_clear()
