"""``plumb`` command-line interface.

Every subcommand prints one JSON object on stdout.  Exit status is 0 on
success, 1 on a computation error and 2 on a usage or input error; errors
are printed as ``{"error": {"code", "message", "witness"}}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import invariants as inv
from . import latopt
from .cycles import Cycle, ZERO, format_coeff, format_cycle, parse_cycle
from .errors import InputError, PlumbError
from .graph import PlumbingGraph, determinant, format_graph, parse_graph
from .lattice import canonical_cycle, chi, chi_bundle, dual_basis


def _corpus_dir():
    return resources.files("plumb") / "corpus"


def corpus() -> list[str]:
    """Names of the bundled graph files."""
    return sorted(p.name for p in _corpus_dir().iterdir() if p.name.endswith(".graph"))


def load_corpus_graph(name: str) -> PlumbingGraph:
    stem = name[:-6] if name.endswith(".graph") else name
    text = (_corpus_dir() / f"{stem}.graph").read_text(encoding="utf-8")
    return parse_graph(text, stem)


def _resolve(path: str) -> Path | None:
    p = Path(path)
    if p.exists():
        return p
    for name in (p.name, p.name + ".graph"):
        bundled = _corpus_dir() / name
        if bundled.is_file():
            return Path(str(bundled))
    return None


def read_graph(path: str) -> PlumbingGraph:
    p = _resolve(path)
    if p is None:
        raise InputError(f"graph file {path!r} not found", {"path": path})
    return parse_graph(p.read_text(encoding="utf-8"), p.stem)


def read_cycles_file(path: str) -> dict:
    """Parse a ``graph`` / ``Z`` / ``chern`` demonstration file."""
    p = _resolve(path)
    if p is None:
        raise InputError(f"cycle file {path!r} not found", {"path": path})
    out = {}
    for n, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head not in ("graph", "Z", "chern"):
            raise InputError(f"{p.name}:{n}: unknown keyword {head!r}")
        out[head] = rest.strip()
    if "graph" in out:
        gp = p.parent / out["graph"]
        out["graph"] = str(gp) if gp.exists() else out["graph"]
    return out


def _num(x):
    return x if isinstance(x, int) else format_coeff(x)


def _full(g: PlumbingGraph, c: Cycle) -> dict:
    return {str(v): format_coeff(c[v]) for v in g.ids}


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


# ----------------------------------------------------------------------
# subcommands


def cmd_check(a):
    g = read_graph(a.graph)
    return {"name": g.name, "vertices": len(g), "edges": len(g.edges), "determinant": determinant(g),
            "valid": True, "text": format_graph(g)}


def cmd_chi(a):
    g = read_graph(a.graph)
    l = parse_cycle(a.cycle)
    g.require(l)
    return {"value": _num(chi(g, l))}


def cmd_zk(a):
    g = read_graph(a.graph)
    return {"Z_K": _full(g, canonical_cycle(g))}


def cmd_dual(a):
    g = read_graph(a.graph)
    vs = [a.vertex] if a.vertex is not None else list(g.ids)
    return {"dual": {str(v): _full(g, dual_basis(g, v)) for v in vs}}


def cmd_h1_struct(a):
    g = read_graph(a.graph)
    value, r = inv.h1_struct_witness(g, parse_cycle(a.Z), a.engine, a.budget)
    out = {"value": value}
    if r is not None:
        out.update({"argmin": format_cycle(r.argmin), "engine": r.engine})
    return out


def cmd_h1_gen(a):
    g = read_graph(a.graph)
    value, r = inv.h1_gen_bundle_witness(g, parse_cycle(a.Z), parse_cycle(a.chern), a.engine, a.budget)
    return {"value": value, "argmin": format_cycle(r.argmin), "engine": r.engine}


def cmd_dim_im(a):
    g = read_graph(a.graph)
    value, w = inv.dim_im_witness(g, parse_cycle(a.Z), parse_cycle(a.chern))
    return {"value": value, "argmin": format_cycle(w), "engine": "exhaustive"}


def cmd_vdim(a):
    g = read_graph(a.graph)
    value, w = inv.vdim_witness(g, parse_cycle(a.Z), parse_cycle(a.chern), a.vertex)
    return {"value": value, "argmin": format_cycle(w), "engine": "exhaustive"}


def cmd_pg(a):
    g = read_graph(a.graph)
    value, r = inv.pg_witness(g, a.engine, a.budget)
    return {"value": value, "argmin": format_cycle(r.argmin), "engine": r.engine, "bound": r.bound,
            "artin_rational": inv.artin_rational(g, a.engine, a.budget)}


def cmd_h1_nat(a):
    from .natline import Solver

    graph, Z, chern = a.graph, a.Z, a.chern
    if a.cycles:
        spec = read_cycles_file(a.cycles)
        graph = graph or spec.get("graph")
        Z = Z if Z is not None else spec.get("Z")
        chern = chern if chern is not None else spec.get("chern")
    if graph is None or Z is None:
        raise InputError("h1-nat needs a graph and -Z (directly or via --cycles)")
    g = read_graph(graph)
    s = Solver(engine=a.engine, budget=a.budget, blowup_budget=a.budget_blowups, tv_cap=a.tv_cap,
               debug=a.debug_asserts)
    res = s.compute(g, parse_cycle(Z), parse_cycle(chern or ""))
    return res.to_json(with_trace=a.trace)


def cmd_selftest(a):
    from .oracle import run_battery

    g = read_graph(a.graph)
    rep = run_battery(g, seed=a.seed, count=a.count, engine=a.engine,
                      blowup_budget=a.budget_blowups, tv_cap=a.tv_cap)
    if not a.json:
        failed = [k for k, v in rep["checks"].items() if v["failed"]]
        rep = {"graph": rep["graph"], "ok": rep["ok"], "failed": failed}
    return rep, (0 if rep["ok"] else 1)


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", choices=latopt.ENGINES, default="exhaustive",
                        help="minimisation engine (default: exhaustive)")
    common.add_argument("--budget", type=int, default=None,
                        help="enumeration budget in points (default: $PLUMB_BUDGET or 10^7)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for enumeration")

    p = argparse.ArgumentParser(prog="plumb", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, graph=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if graph:
            sp.add_argument("graph", help="graph file (bundled corpus names also accepted)")
        sp.set_defaults(func=fn)
        return sp

    add("check", cmd_check, "validate a graph file")
    add("chi", cmd_chi, "Riemann-Roch χ of a cycle").add_argument("-l", "--cycle", required=True)
    add("zk", cmd_zk, "canonical cycle")
    add("dual", cmd_dual, "dual basis E*_v").add_argument("-v", "--vertex", type=int)
    add("h1-struct", cmd_h1_struct, "h1 of the structure sheaf of Z").add_argument("-Z", required=True)
    for name, fn, h in (("h1-gen", cmd_h1_gen, "h1 of a generic line bundle"),
                        ("dim-im", cmd_dim_im, "Abel image dimension"),
                        ("vdim", cmd_vdim, "stabilised image dimension along E*_v")):
        sp = add(name, fn, h)
        sp.add_argument("-Z", required=True)
        sp.add_argument("--chern", required=True)
        if name == "vdim":
            sp.add_argument("-v", "--vertex", type=int, required=True)
    add("pg", cmd_pg, "geometric genus of the generic structure")

    def recursion_flags(sp):
        sp.add_argument("--budget-blowups", type=int, default=None,
                        help="nested edge-blowup limit (default 10 + sum of t_v)")
        sp.add_argument("--tv-cap", type=int, default=64, help="maximal blowup chain for t_v")

    sp = sub.add_parser("h1-nat", parents=[common], help="h0/h1 of the natural line bundle O_Z(Z')")
    sp.add_argument("graph", nargs="?")
    sp.add_argument("-Z")
    sp.add_argument("--chern")
    sp.add_argument("--cycles", help="file with graph / Z / chern lines")
    sp.add_argument("--trace", action="store_true")
    sp.add_argument("--debug-asserts", action="store_true",
                    help="recompute unpruned with alternative tie-breaks and check extra identities")
    recursion_flags(sp)
    sp.set_defaults(func=cmd_h1_nat)

    sp = add("selftest", cmd_selftest, "run the seeded consistency battery")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--json", action="store_true", help="print the full report")
    recursion_flags(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    latopt.JOBS = max(1, a.jobs)
    try:
        out = a.func(a)
        status = 0
        if isinstance(out, tuple):
            out, status = out
        _emit(out)
        return status
    except PlumbError as e:
        _emit({"error": e.to_json()})
        return e.exit_status
    finally:
        latopt.JOBS = 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
