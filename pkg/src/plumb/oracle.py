"""Seeded consistency battery.

Each check compares two separately implemented quantities on random
``(Z, Z')`` pairs.  A check never aborts the run: exceptions are recorded as
failures together with the instance that triggered them.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction

from . import invariants as inv
from . import latopt
from . import natline
from .cycles import Cycle, ZERO, format_cycle, reduced
from .errors import PlumbError
from .graph import PlumbingGraph, blowup_free, components
from .lattice import chi, degree, dual_basis, pairing, pullback

CHECKS = (
    "euler",
    "nonnegativity",
    "zero_twist",
    "base_equivalence",
    "negative_on_support",
    "blowup_invariance",
    "monotonicity",
    "determinism",
    "dim_im_bounds",
    "dim_im_monotone",
    "vdim_stabilization",
    "h1_additivity",
    "h1_gen_vs_struct",
    "artin_vs_pg",
    "engine_agreement",
    "chi_additivity",
)
MAX_WITNESSES = 5


class _Tally:
    def __init__(self):
        self.data = {c: {"passed": 0, "failed": 0, "skipped": 0, "failures": []} for c in CHECKS}

    def run(self, name, instance, fn):
        entry = self.data[name]
        try:
            ok = fn()
        except PlumbError as e:
            ok, instance = False, dict(instance, error=e.to_json())
        except Exception as e:  # a crashing check is still just a failed check
            ok, instance = False, dict(instance, error={"code": type(e).__name__, "message": str(e)})
        if ok is None:
            entry["skipped"] += 1
        elif ok is True:
            entry["passed"] += 1
        else:
            entry["failed"] += 1
            if len(entry["failures"]) < MAX_WITNESSES:
                entry["failures"].append(instance if ok is False else dict(instance, detail=ok))


def random_cycle(g: PlumbingGraph, rng: random.Random, max_coeff: int = 3) -> Cycle:
    vs = list(g.ids)
    k = rng.randint(1, len(vs))
    support = rng.sample(vs, k)
    return Cycle({v: rng.randint(1, max_coeff) for v in support})


def random_chern(g: PlumbingGraph, rng: random.Random, terms: int = 2) -> Cycle:
    """Small mix of integer multiples of ``E*_v`` and ``E_v``; always in ``L'``."""
    zp = ZERO
    for _ in range(rng.randint(0, terms)):
        zp = zp + dual_basis(g, rng.choice(g.ids)) * rng.randint(-2, 2)
    for _ in range(rng.randint(0, terms)):
        zp = zp + Cycle({rng.choice(g.ids): rng.randint(-2, 2)})
    return zp


def _negative_on(g, Z, Zp, rng):
    u = rng.choice(sorted(Z.support))
    d = dual_basis(g, u)
    while any(Zp[v] >= 0 for v in Z.support):
        Zp = Zp - d
    return Zp


def _lipman_on(g, Z, Zp):
    for v in sorted(Z.support):
        d = degree(g, Zp, v)
        if d < 0:
            Zp = Zp - dual_basis(g, v) * (-d)
    return Zp


def _random_box(g, rng, shift):
    lower, upper = {}, {}
    for v in g.ids:
        a = rng.randint(-1, 2)
        lower[v], upper[v] = a, a + rng.randint(0, 3)
    spec = latopt.BoxSpec(Cycle(lower), Cycle(upper), frozenset(), shift)
    size = 1
    for v in g.ids:
        size *= upper[v] - lower[v] + 1
    if size > 10**5:
        return latopt.BoxSpec(Cycle(lower), Cycle(lower), frozenset(), shift)
    return spec


def _random_rational(g, rng):
    return Cycle({v: Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for v in g.ids})


def run_battery(g: PlumbingGraph, seed: int = 0, count: int = 20, max_coeff: int = 3,
                engine: str = "exhaustive", blowup_budget: int | None = None,
                tv_cap: int = natline.DEFAULT_TV_CAP, checks=CHECKS) -> dict:
    rng = random.Random(seed)
    tally = _Tally()
    wanted = set(checks)

    def solver():
        return natline.Solver(engine=engine, blowup_budget=blowup_budget, tv_cap=tv_cap)

    def check(name, inst, fn):
        if name in wanted:
            tally.run(name, inst, fn)

    check("artin_vs_pg", {"graph": g.name},
          lambda: inv.artin_rational(g, engine) == (inv.pg(g, engine) == 0))

    for _ in range(count):
        Z = random_cycle(g, rng, max_coeff)
        Zp = random_chern(g, rng)
        inst = {"Z": format_cycle(Z), "Zp": format_cycle(Zp)}
        main = {}

        def run_main():
            s = solver()
            res = s.compute(g, Z, Zp)
            main["res"] = res
            return res

        def euler():
            res = run_main()
            natline.replay(res.trace)
            return res.h0 - res.h1 == chi(g, Z) + pairing(g, Zp, Z)

        check("euler", inst, euler)

        def nonneg():
            res = main.get("res") or run_main()
            return all(r["h0"] >= 0 and r["h1"] >= 0 for r in res.trace if "h0" in r)

        check("nonnegativity", inst, nonneg)
        check("zero_twist", inst, lambda: solver().compute(g, Z, ZERO).h1 == inv.h1_struct(g, Z, engine))

        def base_eq():
            if inv.h1_struct(g, Z, engine) != 0:
                return None
            res = main.get("res") or run_main()
            return res.h1 == inv.h1_gen_bundle(g, Z, Zp, engine)

        check("base_equivalence", inst, base_eq)

        zneg = _negative_on(g, Z, Zp, rng)

        def neg_support():
            return solver().compute(g, Z, zneg).h1 == inv.h1_gen_bundle(g, Z, zneg, engine)

        check("negative_on_support", dict(inst, Zp=format_cycle(zneg)), neg_support)

        v = rng.choice(sorted(Z.support))

        def blowup():
            res = main.get("res") or run_main()
            g2, bd = blowup_free(g, v)
            r2 = solver().compute(g2, pullback(bd, Z), pullback(bd, Zp))
            return (r2.h0, r2.h1) == (res.h0, res.h1)

        check("blowup_invariance", dict(inst, vertex=v), blowup)

        Z1 = Cycle({u: rng.randint(0, c) for u, c in Z.items()})

        def monotone():
            res = main.get("res") or run_main()
            return solver().compute(g, Z1, Zp).h1 <= res.h1

        check("monotonicity", dict(inst, Z1=format_cycle(Z1)), monotone)

        def determinism():
            a = solver().compute(g, Z, Zp)
            b = solver().compute(g, Z, Zp)
            return json.dumps(a.to_json(True), sort_keys=True) == json.dumps(b.to_json(True), sort_keys=True)

        check("determinism", inst, determinism)

        zl = _lipman_on(g, Z, Zp)
        linst = dict(inst, Zp=format_cycle(zl))

        def bounds():
            d = inv.dim_im(g, Z, zl)
            return 0 <= d <= inv.h1_struct(g, Z, engine)

        check("dim_im_bounds", linst, bounds)
        u = rng.choice(g.ids)
        check("dim_im_monotone", dict(linst, vertex=u),
              lambda: inv.dim_im(g, Z, zl - dual_basis(g, u)) >= inv.dim_im(g, Z, zl))

        def stabilization():
            dv = dual_basis(g, v)
            seq = [inv.dim_im(g, Z, zl - dv * n) for n in range(9)]
            mono = all(a <= b for a, b in zip(seq, seq[1:]))
            if mono and seq[-1] == inv.vdim(g, Z, zl, v):
                return True
            return {"sequence": seq}

        check("vdim_stabilization", dict(linst, vertex=v), stabilization)

        def additivity():
            parts = sum(inv.h1_struct(g, Z.restrict(c), engine, split=False)
                        for c in components(g, Z.support))
            whole = inv.h1_struct(g, Z, engine, split=False)
            axes, table = inv.h1_struct_table(g, Z)
            return parts == whole == int(table[tuple(Z[a] for a in axes)])

        check("h1_additivity", inst, additivity)
        check("h1_gen_vs_struct", inst,
              lambda: inv.h1_gen_bundle(g, Z, ZERO, engine) <= inv.h1_struct(g, Z, engine))

        spec = _random_box(g, rng, Zp)

        def engines():
            ex = latopt.min_box(g, spec, "exhaustive")
            de = latopt.min_box(g, spec, "descent")
            dp = latopt.min_box(g, spec, "treedp")
            ok = ex.value == dp.value and ex.argmin == dp.argmin
            ok = ok and (de.unverified or de.value == ex.value)
            return ok or {"exhaustive": ex.value, "descent": de.value, "treedp": dp.value}

        check("engine_agreement", {"lower": format_cycle(spec.lower), "upper": format_cycle(spec.upper),
                                   "shift": format_cycle(spec.shift)}, engines)

        a, b = _random_rational(g, rng), _random_rational(g, rng)
        check("chi_additivity", {"a": format_cycle(a), "b": format_cycle(b)},
              lambda: chi(g, a + b) == chi(g, a) + chi(g, b) - pairing(g, a, b))

    report = {"graph": g.name, "seed": seed, "count": count, "checks": tally.data}
    report["ok"] = all(c["failed"] == 0 for c in tally.data.values())
    return report

