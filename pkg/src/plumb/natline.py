"""h¹ and h⁰ of natural line bundles ``O_Z(Z')`` on a generic singularity.

:class:`Solver` runs the recursive case analysis on ``(graph, Z, Z')``:

========  ==============================================================
zero      ``Z = 0``
split     ``|Z|`` disconnected: sum over components
base      ``h1_struct(Z) = 0``: generic bundle formula
S5        some vertex of ``|Z|`` is droppable
S4        ``|Z|`` meets the support of ``Z'``
trivial   no vertex of ``|Z|`` has a neighbour carrying ``Z'``
S1        boundary coefficients of ``Z`` are all 1
S2        reducing the boundary to multiplicity 1 keeps ``h1_struct``
S3        otherwise: blow up a boundary edge
========  ==============================================================

Every node records ``h0 - h1 = chi_bundle`` and nonnegativity; a failure
raises :class:`~plumb.errors.AssumptionViolated` with the node as witness.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import invariants as inv
from .cycles import Cycle, ZERO, basis, format_coeff, format_cycle, reduced
from .errors import (AssumptionViolated, BlowupBudgetExceeded, InputError, NotEffective,
                     TvSearchExceeded)
from .graph import PlumbingGraph, blowup_edge, blowup_free, canonical_key, components, local_key, short_hash
from .lattice import chi, chi_bundle, degree, neg_lipman_member, pairing, pullback, require_lprime

DEFAULT_TV_CAP = 64
STEP_TAGS = ("zero", "split", "base", "trivial-twist", "S1-closed", "S1-rec", "S2", "S3-t",
             "S3-blowup", "S4", "S5")


@dataclass
class BoundaryProfile:
    I: frozenset
    neighbours: dict  # v -> sorted list of nonzero Z'_w, w adjacent outside |Z|
    a: dict
    b: dict
    m: dict
    I_prime: frozenset | None = None

    def to_json(self) -> dict:
        def fmt(d):
            return {str(v): [format_coeff(x) for x in xs] for v, xs in sorted(d.items())}

        out = {"I": sorted(self.I), "C": fmt(self.neighbours), "a": fmt(self.a), "b": fmt(self.b),
               "m": {str(v): format_coeff(x) for v, x in sorted(self.m.items())}}
        out["I_prime"] = None if self.I_prime is None else sorted(self.I_prime)
        return out


@dataclass
class Result:
    h0: int
    h1: int
    chi: int
    trace: list = field(default_factory=list)

    def to_json(self, with_trace: bool = False) -> dict:
        d = {"h0": self.h0, "h1": self.h1, "chi_bundle": self.chi}
        if with_trace:
            d["steps"] = self.trace
        return d


def prune(g: PlumbingGraph, Z: Cycle, Zp: Cycle) -> Cycle:
    """Drop coefficients of ``Zp`` at distance >= 2 from ``|Z|``."""
    near = Z.support | g.neighbourhood(Z.support)
    return Zp.restrict(near)


def boundary_set(g: PlumbingGraph, Z: Cycle, Zp: Cycle) -> frozenset:
    return frozenset(v for v in Z.support if any(Zp[w] for w in g.adj[v] if w not in Z.support))


def boundary_profile(g: PlumbingGraph, Z, Zp, with_prime: bool = True) -> BoundaryProfile:
    """Boundary data of ``Z`` against a disjointly supported ``Zp``."""
    Z, Zp = Cycle(Z), Cycle(Zp)
    if Z.support & Zp.support:
        raise InputError("boundary profile needs disjoint supports")
    I = boundary_set(g, Z, Zp)
    C, a, b, m = {}, {}, {}, {}
    for v in sorted(I):
        cs = sorted(Zp[w] for w in g.adj[v] if w not in Z.support and Zp[w])
        C[v] = cs
        a[v] = [x for x in cs if x > 0]
        b[v] = [-x for x in cs if x < 0]
        m[v] = degree(g, Zp, v)
        if m[v] != sum(cs, Fraction(0)):  # pragma: no cover - Zp vanishes on |Z|
            raise AssumptionViolated("boundary sum differs from the pairing", {"vertex": v})
    prof = BoundaryProfile(I, C, a, b, m)
    if with_prime and neg_lipman_member(g, Z.support, Zp):
        d = inv.dim_im(g, Z, Zp)
        prof.I_prime = frozenset(
            v for v in I
            if inv.vdim(g, Z, Zp, v) == d or (not b[v] and all(Fraction(x).denominator == 1 for x in a[v])))
    return prof


def _box(Z: Cycle):
    vs = sorted(Z.support)
    for t in itertools.product(*(range(Z[v] + 1) for v in vs)):
        yield Cycle._raw(dict(zip(vs, t)))


class Solver:
    """Memoised evaluator; one instance per configuration."""

    def __init__(self, engine: str = "exhaustive", budget: int | None = None,
                 blowup_budget: int | None = None, tv_cap: int = DEFAULT_TV_CAP,
                 debug: bool = False, tie_break: str = "min", prune_far: bool = True,
                 local_keys: bool = True):
        if tie_break not in ("min", "max"):
            raise InputError("tie_break must be 'min' or 'max'")
        self.engine = engine
        self.budget = budget
        self.blowup_budget = blowup_budget
        self.tv_cap = tv_cap
        self.debug = debug
        self.tie_break = tie_break
        self.prune_far = prune_far
        self.local_keys = local_keys
        self.memo: dict[str, tuple[int, int]] = {}
        self.tags: dict[str, str] = {}
        self.trace: list[dict] = []
        self.stats = {"nodes": 0, "blowups": 0, "tv_claim_failures": 0}
        self._s3_depth = 0
        self._s3_limit = None

    # ------------------------------------------------------------------
    # helpers

    def h1s(self, g, Z) -> int:
        return inv.h1_struct(g, Z, self.engine, self.budget)

    def _key(self, g, Z, Zp) -> str:
        return local_key(g, Z, Zp) if self.local_keys else canonical_key(g, Z, Zp)

    def _pick(self, vs):
        return min(vs) if self.tie_break == "min" else max(vs)

    def _fail(self, msg, g, Z, Zp, **extra):
        w = {"graph": g.name, "Z": format_cycle(Z), "Zp": format_cycle(Zp)}
        w.update(extra)
        raise AssumptionViolated(msg, w)

    # ------------------------------------------------------------------
    # public

    def compute(self, g: PlumbingGraph, Z, Zp) -> Result:
        Z, Zp = Cycle(Z), Cycle(Zp)
        g.require(Z.support | Zp.support)
        if not Z.is_integral() or not Z.is_effective():
            raise NotEffective(f"Z = {format_cycle(Z)} is not an effective integral cycle")
        require_lprime(g, Zp)
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            h0, h1 = self.node(g, Z, Zp)
        finally:
            sys.setrecursionlimit(limit)
        if not Z:
            self.trace.append({"key": short_hash("zero"), "step": "zero", "Z": "0", "Zp": format_cycle(Zp),
                               "h0": 0, "h1": 0, "chi": 0})
        if self.debug:
            self._debug_recompute(g, Z, Zp, h0, h1)
        return Result(h0, h1, chi_bundle(g, Z, Zp), list(self.trace))

    def _debug_recompute(self, g, Z, Zp, h0, h1):
        alt = Solver(self.engine, self.budget, self.blowup_budget, self.tv_cap, debug=False,
                     tie_break="max" if self.tie_break == "min" else "min",
                     prune_far=False, local_keys=False)
        a0, a1 = alt.node(g, Z, Zp)
        if (a0, a1) != (h0, h1):
            self._fail("unpruned recompute with alternative tie-breaks disagrees", g, Z, Zp,
                       primary=[h0, h1], alternative=[a0, a1])

    # ------------------------------------------------------------------
    # one node

    def node(self, g: PlumbingGraph, Z: Cycle, Zp: Cycle) -> tuple[int, int]:
        if self.prune_far:
            Zp = prune(g, Z, Zp)
        if not Z:
            return 0, 0
        key = self._key(g, Z, Zp)
        if key in self.memo:
            return self.memo[key]
        self.stats["nodes"] += 1
        c = chi_bundle(g, Z, Zp)
        tag, h1, rec = self._dispatch(g, Z, Zp, c)
        h0 = c + h1
        # Euler check against the rational Riemann-Roch path
        c2 = chi(g, Z) + pairing(g, Zp, Z)
        if h0 - h1 != c2:
            self._fail("Euler identity h0 - h1 = chi fails", g, Z, Zp, h0=h0, h1=h1, chi=str(c2))
        if h0 < 0 or h1 < 0:
            self._fail(f"negative cohomology at step {tag}", g, Z, Zp, h0=h0, h1=h1)
        self.memo[key] = (h0, h1)
        self.tags[key] = tag
        record = {"key": short_hash(key), "step": tag, "Z": format_cycle(Z), "Zp": format_cycle(Zp),
                  "h0": h0, "h1": h1, "chi": c}
        record.update(rec)
        self.trace.append(record)
        return h0, h1

    def child(self, g, Z, Zp) -> tuple[int, int, str | None]:
        """Evaluate a subproblem and return ``(h0, h1, short key)``."""
        Z = Cycle(Z)
        Zp = Cycle(Zp)
        h0, h1 = self.node(g, Z, Zp)
        if not Z:
            return h0, h1, None
        pz = prune(g, Z, Zp) if self.prune_far else Zp
        return h0, h1, short_hash(self._key(g, Z, pz))

    def _dispatch(self, g, Z, Zp, c):
        comps = components(g, Z.support)
        if len(comps) > 1:
            parts = [self.child(g, Z.restrict(C), Zp) for C in comps]
            return "split", sum(p[1] for p in parts), {"children": [p[2] for p in parts]}
        r = self.h1s(g, Z)
        if r == 0:
            h1, m = inv.h1_gen_bundle_witness(g, Z, Zp, self.engine, self.budget)
            if self.debug:
                self._check_base(g, Z, Zp, h1)
            return "base", h1, {"choice": format_cycle(m.argmin), "min": m.value}
        if inv.droppable_vertices(g, Z, self.engine, self.budget):
            return self.step5(g, Z, Zp, c, r)
        if Z.support & Zp.support:
            return self.step4(g, Z, Zp, c, r)
        I = boundary_set(g, Z, Zp)
        if not I:
            return "trivial-twist", r, {"r": r}
        if all(Z[v] == 1 for v in I):
            return self.step1(g, Z, Zp, c, r)
        Zt = Z.drop(I) + reduced(I)
        if self.h1s(g, Zt) == r:
            return self.step2(g, Z, Zp, c, r, Zt)
        return self.step3(g, Z, Zp, c, r, I)

    def _check_base(self, g, Z, Zp, h1):
        # χ(-Z') - min_{0<=l<=Z} χ(-Z'+l), all in rational arithmetic
        base = chi(g, -Zp)
        alt = base - min(chi(g, -Zp + l) for l in _box(Z))
        if alt != h1:
            self._fail("base-case identity fails", g, Z, Zp, h1=h1, alternative=str(alt))

    def _max_terms(self, g, terms):
        """First strict maximum of ``child.h1 + chi`` over ``(label, Zl, Zpl, chi)`` items."""
        best = None
        for label, Zl, Zpl, cterm in terms:
            _, h1, k = self.child(g, Zl, Zpl)
            val = h1 + cterm
            if best is None or val > best[0]:
                best = (val, label, k, h1, cterm)
        return best

    def _vl_terms(self, g, Z, Zp):
        for l in _box(Z):
            if not l:
                continue
            vl = self._pick(l.support)
            rest = Z - l
            yield format_cycle(l), rest.drop([vl]), Zp - l, chi_bundle(g, rest, Zp - l)

    # ------------------------------------------------------------------
    # steps

    def step1(self, g, Z, Zp, c, r):
        if self.debug:
            self._require_s1(g, Z, Zp, r)
        prof = boundary_profile(g, Z, Zp)
        if prof.I_prime is not None and prof.I_prime == prof.I:
            d = inv.dim_im(g, Z, Zp)
            return "S1-closed", r - d, {"r": r, "dim_im": d, "profile": prof.to_json()}
        val, label, k, h1c, cterm = self._max_terms(g, self._vl_terms(g, Z, Zp))
        return "S1-rec", val - c, {"choice": label, "child": k, "child_h1": h1c, "term": cterm,
                                   "profile": prof.to_json()}

    def _require_s1(self, g, Z, Zp, r):
        I = boundary_set(g, Z, Zp)
        ok = (len(components(g, Z.support)) == 1 and r >= 1 and bool(I)
              and not (Z.support & Zp.support) and all(Z[v] == 1 for v in I)
              and not inv.droppable_vertices(g, Z, self.engine, self.budget))
        if not ok:
            self._fail("step 1 preconditions fail", g, Z, Zp)

    def step2(self, g, Z, Zp, c, r, Zt):
        h0t, h1t, kt = self.child(g, Zt, Zp)
        if self.tags.get(self._key(g, Zt, prune(g, Zt, Zp) if self.prune_far else Zp), "").split("-")[0] != "S1":
            self._fail("reduced boundary cycle does not satisfy step 1", g, Z, Zp, reduced=format_cycle(Zt))
        A = c + h1t
        val, label, k, h1c, cterm = self._max_terms(g, self._vl_terms(g, Z, Zp))
        if A >= val:
            rec = {"choice": "A", "child": kt, "child_h1": h1t, "term": c, "B": val}
            return "S2", A - c, rec
        return "S2", val - c, {"choice": label, "child": k, "child_h1": h1c, "term": cterm, "A": A}

    def t_value(self, g, Z, v, cap=None) -> int:
        """Length of the generic blowup chain at ``v`` after which dropping its tip keeps ``h1``."""
        cap = self.tv_cap if cap is None else cap
        Z = Cycle(Z)
        r = self.h1s(g, Z)
        if r < 1 or v not in Z.support:
            raise AssumptionViolated("t_v needs r >= 1 and v in |Z|", {"vertex": v, "r": r})
        zv = Z[v]
        gi, Zi, tip = g, Z, v
        for i in range(1, cap + 1):
            gi, bd = blowup_free(gi, tip)
            Zi = pullback(bd, Zi)
            tip = bd.new_vertex
            if self.h1s(gi, Zi) == r and self.h1s(gi, Zi - basis(tip, zv)) == r:
                return i
        raise TvSearchExceeded(f"t_v at vertex {v} exceeds cap {cap}", {"vertex": v, "cap": cap})

    def step3(self, g, Z, Zp, c, r, I):
        tv = {v: self.t_value(g, Z, v) for v in sorted(I)}
        if self._s3_depth == 0:
            self._s3_limit = self.blowup_budget if self.blowup_budget is not None else 10 + sum(tv.values())
        if self._s3_depth >= self._s3_limit:
            raise BlowupBudgetExceeded(f"more than {self._s3_limit} nested edge blowups",
                                       {"graph": g.name, "Z": format_cycle(Z), "limit": self._s3_limit})
        big = [v for v in tv if tv[v] > 1]
        if not big:
            self._fail("all t_v = 1 but the reduced boundary lost h1", g, Z, Zp, t=tv)
        v = self._pick(big)
        w = self._pick([u for u in g.adj[v] if u not in Z.support and Zp[u]])
        self.trace.append({"key": short_hash(self._key(g, Z, Zp)), "step": "S3-t",
                           "t": {str(k): t for k, t in tv.items()}, "edge": [v, w]})
        self._s3_depth += 1
        self.stats["blowups"] += 1
        try:
            g2, bd = blowup_edge(g, v, w)
            v1 = bd.new_vertex
            Zn, Zpn = pullback(bd, Z), pullback(bd, Zp)
            if inv.droppable_vertices(g2, Zn, self.engine, self.budget):
                self._fail("blown-up cycle has a droppable vertex", g, Z, Zp, edge=[v, w])
            zw = Zp[w]
            excluded = basis(v1, zw)
            cn = chi_bundle(g2, Zn, Zpn)
            if cn != c:
                self._fail("pullback changed chi_bundle", g, Z, Zp, edge=[v, w])

            def terms():
                for l in _box(Zn):
                    if l == excluded:
                        continue
                    rest = Zn - l
                    yield format_cycle(l), rest.drop([v1]), Zpn - l, chi_bundle(g2, rest, Zpn - l)

            val, label, k, h1c, cterm = self._max_terms(g2, terms())
            rec = {"edge": [v, w], "new_vertex": v1, "t": {str(x): t for x, t in tv.items()}}
            if isinstance(zw, int) and 0 < zw <= Z[v]:
                n0, _, kn = self.child(g2, Zn - excluded, Zpn - excluded)
                self._check_tv_claim(g2, Zn - excluded, Zpn - excluded, v1, tv[v])
                if n0 > val:
                    rec.update({"choice": "N", "child": kn, "child_h0": n0, "term": 0})
                    return "S3-blowup", n0 - cn, rec
                rec["N"] = n0
            rec.update({"choice": label, "child": k, "child_h1": h1c, "term": cterm})
            return "S3-blowup", val - cn, rec
        finally:
            self._s3_depth -= 1

    def _check_tv_claim(self, g2, Z2, Zp2, v1, tv):
        # the shrinking claim t_{v1} = t_v - 1 is logged, never relied on
        if v1 not in Z2.support or self.h1s(g2, Z2) < 1:
            return
        try:
            if self.t_value(g2, Z2, v1) != tv - 1:
                self.stats["tv_claim_failures"] += 1
        except (TvSearchExceeded, AssumptionViolated):
            self.stats["tv_claim_failures"] += 1

    def step4(self, g, Z, Zp, c, r):
        def terms():
            for l in _box(Z):
                rest, zl = Z - l, Zp - l
                Il = rest.support & zl.support
                yield format_cycle(l), rest.drop(Il), zl, chi_bundle(g, rest, zl)

        val, label, k, h1c, cterm = self._max_terms(g, terms())
        return "S4", val - c, {"choice": label, "child": k, "child_h1": h1c, "term": cterm}

    def step5(self, g, Z, Zp, c, r):
        def terms():
            for l in _box(Z):
                rest, zl = Z - l, Zp - l
                if not rest:
                    yield format_cycle(l), ZERO, zl, 0
                    continue
                cands = inv.minimal_supports(g, rest, self.engine, self.budget)
                if self.debug and len(cands) > 1:
                    vals = {self.node(g, rest.restrict(I), zl)[1] for I in cands}
                    if len(vals) > 1:
                        self._fail("minimal support candidates give different h1", g, Z, Zp,
                                   l=format_cycle(l), candidates=[sorted(I) for I in cands])
                I = cands[0] if self.tie_break == "min" else cands[-1]
                yield format_cycle(l), rest.restrict(I), zl, chi_bundle(g, rest, zl)

        val, label, k, h1c, cterm = self._max_terms(g, terms())
        return "S5", val - c, {"choice": label, "child": k, "child_h1": h1c, "term": cterm}


def compute(g: PlumbingGraph, Z, Zp, **options) -> Result:
    """Convenience wrapper: a fresh :class:`Solver` per call."""
    return Solver(**options).compute(g, Z, Zp)


def replay(trace: list[dict]) -> None:
    """Re-check the arithmetic of a trace; raises AssumptionViolated on mismatch."""
    by_key = {}
    for rec in trace:
        if rec["step"] != "S3-t":
            by_key[rec["key"]] = rec

    def child(k, field_):
        if k is None:
            return 0
        if k not in by_key:
            raise AssumptionViolated(f"trace refers to unknown node {k}")
        return by_key[k][field_]

    for rec in trace:
        step = rec["step"]
        if step == "S3-t":
            continue
        h0, h1, c = rec["h0"], rec["h1"], rec["chi"]
        ok = h0 - h1 == c and h0 >= 0 and h1 >= 0
        if step == "split":
            ok &= h1 == sum(child(k, "h1") for k in rec["children"])
        elif step == "base":
            ok &= h1 == -rec["min"]
        elif step == "trivial-twist":
            ok &= h1 == rec["r"]
        elif step == "S1-closed":
            ok &= h1 == rec["r"] - rec["dim_im"]
        elif rec.get("choice") == "N":
            ok &= h0 == rec["child_h0"] == child(rec["child"], "h0")
        else:
            ch1 = child(rec["child"], "h1")
            ok &= ch1 == rec["child_h1"] and h0 == ch1 + rec["term"]
        if not ok:
            raise AssumptionViolated(f"trace record {rec['key']} ({step}) does not replay", rec)
