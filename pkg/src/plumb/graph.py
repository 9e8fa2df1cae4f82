"""Plumbing graphs: parsing, validation, blowups and canonical keys.

A plumbing graph here is a decorated tree whose vertices carry the
self-intersection of a rational exceptional curve.  Graphs are immutable;
blowups return new graphs with freshly allocated vertex ids.
"""

from __future__ import annotations

import hashlib
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .cycles import Cycle, format_coeff
from .errors import (
    DuplicateVertex,
    GraphSyntaxError,
    NotAnEdge,
    NotATree,
    NotNegativeDefinite,
    UnknownVertex,
)


def _edge(u: int, w: int) -> tuple[int, int]:
    return (u, w) if u < w else (w, u)


@dataclass(frozen=True, eq=False)
class PlumbingGraph:
    """Vertices ``(id, self_intersection)`` in declaration order plus tree edges."""

    vertices: tuple[tuple[int, int], ...]
    edges: frozenset[tuple[int, int]]
    name: str = ""
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(_edge(u, w) for u, w in self.edges))
        if not self._validated:
            validate(self)

    # basic structure --------------------------------------------------
    @cached_property
    def ids(self) -> tuple[int, ...]:
        """Vertex ids in increasing order (the canonical coordinate order)."""
        return tuple(sorted(v for v, _ in self.vertices))

    @cached_property
    def weight(self) -> dict[int, int]:
        return dict(self.vertices)

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nb: dict[int, list[int]] = {v: [] for v, _ in self.vertices}
        for u, w in self.edges:
            nb[u].append(w)
            nb[w].append(u)
        return {v: tuple(sorted(n)) for v, n in nb.items()}

    def __contains__(self, v) -> bool:
        return v in self.weight

    def __len__(self) -> int:
        return len(self.vertices)

    def require(self, vs: Iterable[int]) -> None:
        bad = sorted(set(vs) - set(self.weight))
        if bad:
            raise UnknownVertex(f"vertex {bad[0]} not in graph {self.name!r}", {"vertex": bad[0]})

    def neighbourhood(self, vs: Iterable[int]) -> frozenset[int]:
        """Vertices at distance exactly 1 from the set ``vs``."""
        vs = set(vs)
        return frozenset(w for v in vs for w in self.adj[v] if w not in vs)

    # identity ---------------------------------------------------------
    @cached_property
    def _ident(self):
        return (tuple(sorted(self.vertices)), tuple(sorted(self.edges)))

    def __eq__(self, other):
        if not isinstance(other, PlumbingGraph):
            return NotImplemented
        return self._ident == other._ident

    def __hash__(self):
        return hash(self._ident)

    def renamed(self, name: str) -> "PlumbingGraph":
        return PlumbingGraph(self.vertices, self.edges, name, _validated=True)


# ----------------------------------------------------------------------
# validation


def elimination_order(g: PlumbingGraph, vertices=None) -> list[int]:
    """Leaves-first order of a forest (children precede parents).

    Each component is rooted at its smallest id.
    """
    vs = set(g.weight) if vertices is None else set(vertices)
    order: list[int] = []
    seen: set[int] = set()
    for root in sorted(vs):
        if root in seen:
            continue
        stack = [(root, None, False)]
        while stack:
            v, parent, done = stack.pop()
            if done:
                order.append(v)
                continue
            seen.add(v)
            stack.append((v, parent, True))
            for w in reversed(g.adj[v]):
                if w in vs and w != parent and w not in seen:
                    stack.append((w, v, False))
    return order


def pivots(g: PlumbingGraph, vertices=None):
    """Exact Gaussian-elimination pivots of the intersection matrix.

    Elimination runs leaves first, so a tree produces no fill-in.  The k-th
    leading principal minor in this order is the product of the first k pivots.
    Pivots are yielded lazily; a consumer must stop at the first zero pivot.
    """
    order = elimination_order(g, vertices)
    pos = {v: i for i, v in enumerate(order)}
    piv: dict[int, Fraction] = {}
    for v in order:
        p = Fraction(g.weight[v])
        for c in g.adj[v]:
            if c in pos and pos[c] < pos[v]:
                p -= Fraction(1) / piv[c]
        piv[v] = p
        yield v, p


def validate(g: PlumbingGraph) -> None:
    ids = [v for v, _ in g.vertices]
    seen = set()
    for v in ids:
        if v in seen:
            raise DuplicateVertex(f"vertex {v} declared twice", {"vertex": v})
        seen.add(v)
    if not ids:
        raise NotATree("graph has no vertices")
    for u, w in g.edges:
        if u == w:
            raise NotATree(f"loop at vertex {u}", {"edge": [u, w]})
        for x in (u, w):
            if x not in seen:
                raise UnknownVertex(f"edge ({u},{w}) uses undeclared vertex {x}", {"vertex": x})
    if len(g.edges) != len(ids) - 1:
        raise NotATree(f"{len(ids)} vertices but {len(g.edges)} edges", {"vertices": len(ids), "edges": len(g.edges)})
    if len(components(g, ids)) != 1:
        raise NotATree("graph is disconnected")
    minor = Fraction(1)
    ordered = []
    for k, (v, p) in enumerate(pivots(g), start=1):
        minor *= p
        ordered.append(v)
        if p >= 0:
            raise NotNegativeDefinite(
                f"leading principal minor {k} on vertices {ordered} is {minor}",
                {"order": k, "vertices": ordered, "minor": format_coeff(_norm(minor))},
            )
    object.__setattr__(g, "_validated", True)


def _norm(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def determinant(g: PlumbingGraph) -> int:
    """det of the intersection matrix (sign (-1)^n for negative definite forms)."""
    d = Fraction(1)
    for _, p in pivots(g):
        d *= p
    assert d.denominator == 1
    return d.numerator


# ----------------------------------------------------------------------
# text format


def parse_graph(text: str, name: str = "") -> PlumbingGraph:
    vertices: list[tuple[int, int]] = []
    edges: list[tuple[int, int]] = []
    seen: set[int] = set()
    gname = name
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        spans = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        toks = [t for t, _ in spans]
        kw, col = spans[0]

        def as_int(i):
            tok, c = spans[i]
            try:
                return int(tok)
            except ValueError:
                raise GraphSyntaxError(f"expected an integer, got {tok!r}", lineno, c) from None

        if kw == "graph":
            if len(toks) != 2:
                raise GraphSyntaxError("expected 'graph <name>'", lineno, col)
            gname = toks[1]
        elif kw == "vertex":
            if len(toks) != 3:
                raise GraphSyntaxError("expected 'vertex <id> <self-intersection>'", lineno, col)
            v, e = as_int(1), as_int(2)
            if v in seen:
                raise DuplicateVertex(f"line {lineno}: vertex {v} declared twice", {"vertex": v, "line": lineno})
            seen.add(v)
            vertices.append((v, e))
        elif kw == "edge":
            if len(toks) != 3:
                raise GraphSyntaxError("expected 'edge <id> <id>'", lineno, col)
            edges.append((as_int(1), as_int(2)))
        elif kw == "genus":
            raise GraphSyntaxError("genus decorations are not supported (all curves are rational)", lineno, col)
        else:
            raise GraphSyntaxError(f"unknown keyword {kw!r}", lineno, col)
    if len({_edge(u, w) for u, w in edges}) != len(edges):
        raise NotATree("repeated edge")
    return PlumbingGraph(tuple(vertices), frozenset(edges), gname)


def format_graph(g: PlumbingGraph) -> str:
    lines = [f"graph {g.name}"] if g.name else []
    lines += [f"vertex {v} {e}" for v, e in g.vertices]
    lines += [f"edge {u} {w}" for u, w in sorted(g.edges)]
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# blowups


@dataclass(frozen=True)
class BlowdownData:
    """Record of one blowup; ``point`` is ``(v,)`` or ``(v, w)``."""

    kind: str  # "free" | "edge"
    point: tuple[int, ...]
    new_vertex: int
    parent: str
    child: str


def _fresh_id(g: PlumbingGraph) -> int:
    return max(g.weight) + 1


def blowup_free(g: PlumbingGraph, v: int) -> tuple[PlumbingGraph, BlowdownData]:
    """Blow up a generic point of ``E_v``."""
    g.require([v])
    u = _fresh_id(g)
    verts = tuple((x, e - 1 if x == v else e) for x, e in g.vertices) + ((u, -1),)
    child = PlumbingGraph(verts, g.edges | {(v, u)}, f"{g.name}+f{v}")
    return child, BlowdownData("free", (v,), u, g.name, child.name)


def blowup_edge(g: PlumbingGraph, v: int, w: int) -> tuple[PlumbingGraph, BlowdownData]:
    """Blow up the intersection point ``E_v ∩ E_w``."""
    if _edge(v, w) not in g.edges:
        raise NotAnEdge(f"({v},{w}) is not an edge of {g.name!r}", {"edge": [v, w]})
    u = _fresh_id(g)
    verts = tuple((x, e - 1 if x in (v, w) else e) for x, e in g.vertices) + ((u, -1),)
    edges = (g.edges - {_edge(v, w)}) | {(v, u), (w, u)}
    child = PlumbingGraph(verts, edges, f"{g.name}+e{v}.{w}")
    return child, BlowdownData("edge", (v, w), u, g.name, child.name)


# ----------------------------------------------------------------------
# supports


def components(g: PlumbingGraph, vs: Iterable[int]) -> list[frozenset[int]]:
    """Connected components of the induced subgraph, ordered by smallest member."""
    vs = set(vs)
    g.require(vs)
    out = []
    left = set(vs)
    for start in sorted(vs):
        if start not in left:
            continue
        comp = {start}
        stack = [start]
        left.discard(start)
        while stack:
            x = stack.pop()
            for y in g.adj[x]:
                if y in left:
                    left.discard(y)
                    comp.add(y)
                    stack.append(y)
        out.append(frozenset(comp))
    return out


# ----------------------------------------------------------------------
# canonical keys


def _tree_code(adj: Mapping[int, Iterable[int]], labels: Mapping[int, str], vs: set[int]) -> str:
    """AHU canonical code of a labelled tree (centre-rooted)."""
    if len(vs) == 1:
        (v,) = vs
        return f"({labels[v]})"
    deg = {v: sum(1 for w in adj[v] if w in vs) for v in vs}
    layer = [v for v in vs if deg[v] <= 1]
    remaining = len(vs)
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in adj[v]:
                if w in vs and deg[w] > 1:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
            deg[v] = 0
        layer = nxt
    centres = layer

    def code(root, banned):
        # iterative post-order to stay clear of recursion limits on long chains
        out: dict[int, str] = {}
        stack = [(root, banned, False)]
        while stack:
            v, parent, done = stack.pop()
            if not done:
                stack.append((v, parent, True))
                for w in adj[v]:
                    if w in vs and w != parent:
                        stack.append((w, v, False))
            else:
                kids = sorted(out.pop(w) for w in adj[v] if w in vs and w != parent)
                out[v] = "(" + labels[v] + "".join(kids) + ")"
        return out[root]

    if len(centres) == 1:
        return code(centres[0], None)
    a, b = centres
    # edge-centred: root at the central edge
    ca, cb = code(a, b), code(b, a)
    return "[" + "".join(sorted((ca, cb))) + "]"


def forest_code(adj, labels, vs) -> str:
    comps = []
    left = set(vs)
    while left:
        s = min(left)
        comp, stack = {s}, [s]
        left.discard(s)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in left:
                    left.discard(y)
                    comp.add(y)
                    stack.append(y)
        comps.append(_tree_code(adj, labels, comp))
    return "".join(sorted(comps))


def canonical_key(g: PlumbingGraph, Z: Mapping, Zp: Mapping) -> str:
    """Isomorphism-invariant key of ``(graph, Z, Z')``.

    Vertex labels are ``weight|Z_v|Z'_v`` with ``Z'_v`` in lowest terms, so
    relabelled copies of the same decorated tree give byte-identical keys.
    """
    Z, Zp = Cycle(Z), Cycle(Zp)
    g.require(Z.support | Zp.support)
    labels = {v: f"{g.weight[v]}|{Z[v]}|{format_coeff(Zp[v])}" for v in g.weight}
    return "T" + forest_code(g.adj, labels, set(g.weight))


def short_hash(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()[:12]


def local_key(g: PlumbingGraph, Z: Mapping, Zp: Mapping) -> str:
    """Key of the data the recursion actually reads.

    Only ``|Z|`` (weights and coefficients) and the ``Z'`` coefficients on
    ``|Z|`` and its neighbours matter; neighbour weights and everything
    farther away never enter a pairing with a cycle supported in ``|Z|``.
    """
    Z, Zp = Cycle(Z), Cycle(Zp)
    supp = Z.support
    keep = set(supp) | {w for w in g.neighbourhood(supp) if Zp[w]}
    labels = {}
    for v in keep:
        head = str(g.weight[v]) if v in supp else "*"
        labels[v] = f"{head}|{Z[v]}|{format_coeff(Zp[v])}"
    return "L" + forest_code(g.adj, labels, keep)
