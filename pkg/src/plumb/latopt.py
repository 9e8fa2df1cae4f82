"""Minimisation of shifted χ over integer boxes.

Every invariant in this package reduces to minimising

    f(l) = χ(l) + (W, l),      lower <= l <= upper,

for an integral cycle ``l``.  Writing ``w_v = (W, E_v)`` and using the
adjunction formula this is the integral quadratic

    f(l) = Σ_v (l_v + w_v·l_v - e_v·l_v(l_v-1)/2) - Σ_{edges uv} l_u·l_v,

which is strictly convex (``-I`` is positive definite) and submodular
(all cross terms are ``-l_u·l_v``).

Engines:

``exhaustive``
    numpy-vectorised enumeration of the whole box; authoritative.
``descent``
    steepest single-coordinate descent from the lower corner.  Its answer is
    checked against the exact tree dynamic program and flagged ``unverified``
    when the two disagree.
``treedp``
    exact min-sum dynamic programming over the (forest) graph.

Ties are broken towards the lexicographically smallest argmin, comparing
coordinates in increasing vertex-id order.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cycles import Cycle, ZERO
from .errors import BoxTooLarge, InputError, NotInLprime
from .graph import PlumbingGraph
from .lattice import degree

ENGINES = ("exhaustive", "descent", "treedp")
DEFAULT_BUDGET = 10**7
DEFAULT_SIDE_CAP = 64
_CHUNK = 1 << 21

#: worker count used when a caller does not pass ``jobs`` (set by the CLI)
JOBS = 1


def default_budget() -> int:
    env = os.environ.get("PLUMB_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class BoxSpec:
    lower: Cycle = ZERO
    upper: Cycle = ZERO
    frozen_zero: frozenset = frozenset()
    shift: Cycle = ZERO


@dataclass(frozen=True)
class MinResult:
    value: int
    argmin: Cycle
    engine: str
    enumerated: int
    unverified: bool = False
    bound: int | None = field(default=None, compare=False)  # box side used by min_unbounded

    def to_json(self) -> dict:
        from .cycles import format_cycle

        d = {"value": self.value, "argmin": format_cycle(self.argmin), "engine": self.engine,
             "enumerated": self.enumerated}
        if self.unverified:
            d["unverified"] = True
        if self.bound is not None:
            d["bound"] = self.bound
        return d


# ----------------------------------------------------------------------
# problem normalisation


class _Problem:
    """Box problem split into enumerated (free) and pinned coordinates."""

    def __init__(self, g: PlumbingGraph, spec: BoxSpec):
        lo, hi = {}, {}
        for v in g.ids:
            a, b = spec.lower.get(v, 0), spec.upper.get(v, 0)
            if v in spec.frozen_zero:
                if a > 0 or b < 0:
                    raise InputError(f"frozen coordinate {v} has box [{a},{b}] excluding 0")
                a = b = 0
            if not (isinstance(a, int) and isinstance(b, int)):
                raise InputError("box bounds must be integral")
            if a > b:
                raise InputError(f"empty box at vertex {v}: [{a},{b}]")
            lo[v], hi[v] = a, b
        extra = (set(spec.lower) | set(spec.upper) | set(spec.shift)) - set(g.ids)
        if extra:
            raise InputError(f"box refers to unknown vertex {min(extra)}")
        self.g = g
        self.lo, self.hi = lo, hi
        self.free = [v for v in g.ids if lo[v] < hi[v]]
        self.fixed = {v: lo[v] for v in g.ids if lo[v] == hi[v]}
        e = g.weight
        self.lin = {}
        for v in g.ids:
            if lo[v] == hi[v] == 0:
                continue
            d = degree(g, spec.shift, v)
            if not isinstance(d, int):
                raise NotInLprime(f"shift pairs non-integrally with E_{v}: {d}", {"vertex": v, "pairing": str(d)})
            self.lin[v] = 1 + d
        # constant part from pinned coordinates
        c = 0
        for v, x in self.fixed.items():
            if x:
                c += self.lin[v] * x - e[v] * (x * (x - 1) // 2)
        for u, w in g.edges:
            if u in self.fixed and w in self.fixed:
                c -= self.fixed[u] * self.fixed[w]
        self.const = c
        freeset = set(self.free)
        self.free_edges = [(u, w) for u, w in sorted(g.edges) if u in freeset and w in freeset]
        # unary terms of the free coordinates, with pinned neighbours folded in
        self.unary_coef = {}
        for v in self.free:
            pinned = sum(self.fixed.get(u, 0) for u in g.adj[v] if u not in freeset)
            self.unary_coef[v] = (self.lin[v] - pinned, e[v])
        self.size = math.prod(hi[v] - lo[v] + 1 for v in self.free)

    def values(self, v):
        return np.arange(self.lo[v], self.hi[v] + 1, dtype=np.int64)

    def unary(self, v, t):
        a, e = self.unary_coef[v]
        return a * t - e * (t * (t - 1) // 2)

    def magnitude_ok(self) -> bool:
        m = abs(self.const)
        for v in self.free:
            s = max(abs(self.lo[v]), abs(self.hi[v]))
            a, e = self.unary_coef[v]
            m += abs(a) * s + abs(e) * s * s
        for u, w in self.free_edges:
            m += max(abs(self.lo[u]), abs(self.hi[u])) * max(abs(self.lo[w]), abs(self.hi[w]))
        return m < 2**60

    def evaluate(self, point: dict) -> int:
        s = self.const
        for v in self.free:
            s += int(self.unary(v, point[v]))
        for u, w in self.free_edges:
            s -= point[u] * point[w]
        return s

    def cycle(self, point: dict) -> Cycle:
        d = dict(self.fixed)
        d.update(point)
        return Cycle(d)


def f_value(g: PlumbingGraph, l, shift=ZERO) -> int:
    """Direct evaluation of ``χ(l) + (shift, l)`` for an integral ``l``."""
    from .lattice import chi_int

    s = chi_int(g, l)
    for v, x in l.items():
        d = degree(g, shift, v)
        s += x * d
    return s


# ----------------------------------------------------------------------
# exhaustive


def _grid(p: _Problem, axes: list[int], preset: dict, dtype):
    """f over the product of ``axes`` with the other free coordinates set by ``preset``."""
    shape_n = len(axes)
    f = np.full((1,) * shape_n, p.const, dtype=dtype)
    index = {v: i for i, v in enumerate(axes)}
    for v, x in preset.items():
        f = f + int(p.unary(v, x))
    for v in axes:
        t = p.values(v).astype(dtype)
        shape = [1] * shape_n
        shape[index[v]] = -1
        f = f + p.unary(v, t).reshape(shape)
    for u, w in p.free_edges:
        if u in index and w in index:
            tu = p.values(u).astype(dtype)
            tw = p.values(w).astype(dtype)
            su = [1] * shape_n
            sw = [1] * shape_n
            su[index[u]] = -1
            sw[index[w]] = -1
            f = f - tu.reshape(su) * tw.reshape(sw)
        elif u in index or w in index:
            a, b = (u, w) if u in index else (w, u)
            t = p.values(a).astype(dtype)
            s = [1] * shape_n
            s[index[a]] = -1
            f = f - (t * preset[b]).reshape(s)
        else:
            f = f - preset[u] * preset[w]
    shape = [p.hi[v] - p.lo[v] + 1 for v in axes]
    return np.broadcast_to(f, shape)


def _exhaustive(p: _Problem, jobs: int = 1) -> MinResult:
    if not p.free:
        return MinResult(p.const, p.cycle({}), "exhaustive", 1)
    dtype = np.int64 if p.magnitude_ok() else object
    # split into python-iterated outer axes and vectorised inner axes
    inner = list(p.free)
    outer: list[int] = []
    while len(inner) > 1 and math.prod(p.hi[v] - p.lo[v] + 1 for v in inner) > _CHUNK:
        outer.append(inner.pop(0))
    assignments = list(itertools.product(*(range(p.lo[v], p.hi[v] + 1) for v in outer)))

    def run(block):
        best = None
        for asg in block:
            preset = dict(zip(outer, asg))
            arr = _grid(p, inner, preset, dtype)
            flat = np.asarray(arr).reshape(-1)
            i = int(np.argmin(flat))
            val = int(flat[i])
            if best is None or val < best[0]:
                idx = np.unravel_index(i, arr.shape)
                pt = dict(preset)
                pt.update({v: p.lo[v] + int(k) for v, k in zip(inner, idx)})
                best = (val, pt)
        return best

    if jobs > 1 and len(assignments) > 1:
        n = min(jobs, len(assignments))
        step = -(-len(assignments) // n)
        blocks = [assignments[i:i + step] for i in range(0, len(assignments), step)]
        with ThreadPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(run, blocks))
    else:
        results = [run(assignments)]
    # blocks are in lexicographic order, so the first strict minimum wins ties
    best = None
    for r in results:
        if r is not None and (best is None or r[0] < best[0]):
            best = r
    return MinResult(best[0], p.cycle(best[1]), "exhaustive", p.size)


# ----------------------------------------------------------------------
# tree dynamic programme


def _dp_value(p: _Problem, domains: dict) -> int:
    """Exact min of f with free coordinate ``v`` ranging over ``domains[v]``."""
    free = set(p.free)
    adj = {v: [u for u in p.g.adj[v] if u in free] for v in p.free}
    total = p.const
    seen = set()
    dtype = np.int64 if p.magnitude_ok() else object
    for root in p.free:
        if root in seen:
            continue
        order, parent, stack = [], {root: None}, [root]
        seen.add(root)
        while stack:
            v = stack.pop()
            order.append(v)
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    stack.append(u)
        cost = {v: p.unary(v, domains[v].astype(dtype)) for v in order}
        for v in reversed(order):
            up = parent[v]
            if up is None:
                total += int(np.min(cost[v]))
            else:
                m = cost[v][:, None] - np.outer(domains[v].astype(dtype), domains[up].astype(dtype))
                cost[up] = cost[up] + m.min(axis=0)
    return total


def _treedp(p: _Problem, want_argmin: bool = True) -> MinResult:
    domains = {v: p.values(v) for v in p.free}
    best = _dp_value(p, domains)
    runs = 1
    point = {}
    if want_argmin:
        for v in p.free:
            for t in p.values(v):
                trial = dict(domains)
                trial[v] = np.array([t], dtype=np.int64)
                runs += 1
                if _dp_value(p, trial) == best:
                    domains = trial
                    point[v] = int(t)
                    break
            else:  # pragma: no cover - the optimum is attained somewhere
                raise AssertionError("tree DP lost its optimum")
        assert p.evaluate(point) == best
    work = runs * sum(len(d) for d in domains.values())
    return MinResult(best, p.cycle(point) if want_argmin else ZERO, "treedp", work)


# ----------------------------------------------------------------------
# descent


def _descent(p: _Problem, max_steps: int = 10**6) -> MinResult:
    x = {v: p.lo[v] for v in p.free}
    val = p.evaluate(x)
    evals = 1
    for _ in range(max_steps):
        best = None
        for v in p.free:  # increasing id; -1 before +1
            for d in (-1, 1):
                t = x[v] + d
                if t < p.lo[v] or t > p.hi[v]:
                    continue
                x[v] = t
                fv = p.evaluate(x)
                evals += 1
                x[v] = t - d
                if fv < val and (best is None or fv < best[0]):
                    best = (fv, v, t)
        if best is None:
            break
        val, v, t = best
        x[v] = t
    exact = _dp_value(p, {v: p.values(v) for v in p.free}) if p.free else p.const
    return MinResult(val, p.cycle(x), "descent", evals, unverified=(exact != val))


# ----------------------------------------------------------------------
# public API


def min_box(g: PlumbingGraph, spec: BoxSpec, engine: str = "exhaustive",
            budget: int | None = None, jobs: int | None = None) -> MinResult:
    """Minimum of ``χ(l) + (spec.shift, l)`` over the integral box."""
    jobs = JOBS if jobs is None else jobs
    if engine not in ENGINES:
        raise InputError(f"unknown engine {engine!r}; choose from {ENGINES}")
    p = _Problem(g, spec)
    if engine == "exhaustive":
        budget = default_budget() if budget is None else budget
        if p.size > budget:
            raise BoxTooLarge(f"box has {p.size} points, budget {budget}", {"points": p.size, "budget": budget})
        return _exhaustive(p, jobs)
    if engine == "treedp":
        return _treedp(p)
    return _descent(p)


def min_value(g: PlumbingGraph, spec: BoxSpec, engine: str = "exhaustive",
              budget: int | None = None, jobs: int | None = None) -> int:
    """Like :func:`min_box` but only the value (skips lexicographic argmin work)."""
    if engine == "treedp":
        p = _Problem(g, spec)
        return _dp_value(p, {v: p.values(v) for v in p.free}) if p.free else p.const
    return min_box(g, spec, engine, budget, jobs).value


def min_unbounded(g: PlumbingGraph, lower, shift=ZERO, engine: str = "exhaustive",
                  budget: int | None = None, cap: int = DEFAULT_SIDE_CAP, jobs: int | None = None) -> MinResult:
    """Minimum of ``χ(l) + (shift, l)`` over all integral ``l >= lower``.

    The box ``[lower, lower + k·E]`` grows until every point of the next
    shell (some coordinate equal to ``lower_v + k + 1``) has value strictly
    above the current minimum.  By convexity of the continuous quadratic the
    minimum found is then global.
    """
    lower = Cycle(lower)
    ones = Cycle({v: 1 for v in g.ids})
    enumerated = 0
    for k in range(cap):
        inner = min_box(g, BoxSpec(lower, lower + ones * k, frozenset(), Cycle(shift)), engine, budget, jobs)
        enumerated += inner.enumerated
        top = lower + ones * (k + 1)
        shell = None
        for v in g.ids:
            face_lo = lower + Cycle({v: k + 1})
            r = min_box(g, BoxSpec(face_lo, top, frozenset(), Cycle(shift)), engine, budget, jobs)
            enumerated += r.enumerated
            shell = r.value if shell is None else min(shell, r.value)
        if shell > inner.value:
            return MinResult(inner.value, inner.argmin, inner.engine, enumerated, inner.unverified, bound=k)
    raise BoxTooLarge(f"no shell certificate within side cap {cap}", {"cap": cap})


def grid(g: PlumbingGraph, spec: BoxSpec) -> tuple[list[int], np.ndarray]:
    """All values of f on the box as an array whose axes are the free coordinates in id order."""
    p = _Problem(g, spec)
    if p.free and not p.magnitude_ok():
        raise BoxTooLarge("values exceed int64 range for array evaluation")
    if not p.free:
        return [], np.array(p.const, dtype=np.int64)
    return list(p.free), np.ascontiguousarray(_grid(p, p.free, {}, np.int64))
