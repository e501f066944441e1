"""Combinatorial-map representation of ribbon Feynman graphs.

A ribbon graph is stored as a set of vertices, each carrying a cyclic,
counterclockwise-ordered tuple of half-edge names, together with a pairing
of half-edges into internal lines and an attachment of external legs.

Face traversal convention
-------------------------
Write sigma for "next internal half-edge counterclockwise around its
vertex" (external half-edges are skipped but recorded as marks on the
corner being crossed) and alpha for the pairing of the two half-edges of a
line.  Faces are the orbits of sigma o alpha.  External legs never bound
faces of their own: a face is *broken* by precisely the external marks its
traversal crosses.

Worked picture, the one-vertex graph with cycle (h1 h2 h3 h4), line
e = (h1, h2), legs x1 at h3 and x2 at h4::

        x1  x2
         \  /
       .--()--.        sigma o alpha: h1 -> sigma(h2) = h1  (crossing x1, x2)
       |  ||  |                       h2 -> sigma(h1) = h2  (crossing nothing)
       '--||--'
          e

    Faces: {h1} broken by x1, x2 (the outside) and {h2} unbroken (the inside
    of the loop); F = 2, B = 1, and Euler's relation 2 - 2g = n - L + F
    gives g = 0.

Moving the line to (h1, h3) instead separates the legs into two different
faces (F = 2, B = 2): the planar irregular tadpole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import GraphBuildError, InternalCheckError

# A half-edge is addressed by (vertex id, local half-edge name).
HalfRef = tuple[str, str]


@dataclass(frozen=True)
class GraphSpec:
    """Parsed, not-yet-validated graph description."""

    name: str
    vertices: tuple[tuple[str, tuple[str, ...]], ...]
    edges: tuple[tuple[str, tuple[HalfRef, HalfRef]], ...]
    externals: tuple[tuple[str, HalfRef], ...]


@dataclass(frozen=True)
class TopologySummary:
    n: int
    L: int
    F: int
    g: int
    B: int
    N: int


@dataclass(frozen=True)
class Face:
    """One face: its cyclic sequence of half-edge sides and the legs breaking it."""

    sides: tuple[HalfRef, ...]
    externals: tuple[str, ...]

    @property
    def broken(self) -> bool:
        return bool(self.externals)


# A rosette word letter: ("e", edge id, slot) for the slot-th half of a loop
# line (slot 0 is the first-listed half, the tail), or ("x", external id).
RosetteToken = tuple


@dataclass(frozen=True)
class Rosette:
    """Single-vertex contraction of a graph along a spanning tree.

    ``word`` is a linear representative of the cyclic half-edge order at the
    contracted vertex, rotated so its smallest token comes first.  Every
    non-tree line appears exactly twice, every external leg exactly once.
    """

    graph_name: str
    tree: tuple[int, ...]
    word: tuple[RosetteToken, ...]


class RibbonGraph:
    """Validated ribbon graph; read-only after construction.

    Lines are indexed 1..L and external legs 1..N in declaration order; these
    indices select the ``a<i>`` parameters and the ``p_e`` momentum slots.
    """

    def __init__(self, spec: GraphSpec):
        self.name = spec.name
        self.vertices = spec.vertices
        self.edges = spec.edges
        self.externals = spec.externals
        self.vertex_ids = tuple(v for v, _ in spec.vertices)
        self.edge_ids = tuple(e for e, _ in spec.edges)
        self.external_ids = tuple(x for x, _ in spec.externals)
        self._cycles = {v: tuple(hs) for v, hs in spec.vertices}
        self._edge_index = {e: i + 1 for i, (e, _) in enumerate(spec.edges)}
        self._ext_index = {x: i + 1 for i, (x, _) in enumerate(spec.externals)}
        self._partner = {}
        self._owner = {}
        for eid, (h1, h2) in spec.edges:
            self._partner[h1] = h2
            self._partner[h2] = h1
            self._owner[h1] = ("e", eid, 0)
            self._owner[h2] = ("e", eid, 1)
        for xid, h in spec.externals:
            self._owner[h] = ("x", xid)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def L(self) -> int:
        return len(self.edges)

    @property
    def N(self) -> int:
        return len(self.externals)

    @property
    def loop_count(self) -> int:
        return self.L - (self.n - 1)

    def cycle(self, vertex_id: str) -> tuple[str, ...]:
        return self._cycles[vertex_id]

    def edge_index(self, edge_id: str) -> int:
        return self._edge_index[edge_id]

    def ext_index(self, ext_id: str) -> int:
        return self._ext_index[ext_id]

    def edge_halves(self, index: int) -> tuple[HalfRef, HalfRef]:
        return self.edges[index - 1][1]

    def edge_endpoints(self, index: int) -> tuple[str, str]:
        (v1, _), (v2, _) = self.edges[index - 1][1]
        return v1, v2

    def ext_vertex(self, index: int) -> str:
        return self.externals[index - 1][1][0]

    def owner(self, h: HalfRef) -> tuple:
        return self._owner[h]

    def partner(self, h: HalfRef) -> HalfRef:
        return self._partner[h]

    def is_internal(self, h: HalfRef) -> bool:
        return h in self._partner

    def internal_darts(self) -> list[HalfRef]:
        darts = []
        for vid, cycle in self.vertices:
            for name in cycle:
                if ((vid, name)) in self._partner:
                    darts.append((vid, name))
        return darts

    def __repr__(self) -> str:
        return (f"RibbonGraph({self.name!r}: n={self.n}, L={self.L}, "
                f"N={self.N})")


def build_graph(spec: GraphSpec, any_degree: bool = False) -> RibbonGraph:
    """Validate a description and return the graph.

    Rejects dangling or doubly-used half-edges, non-quartic vertices (unless
    ``any_degree``), and disconnected graphs.
    """
    if not spec.vertices:
        raise GraphBuildError("no vertices")
    seen_vertices = set()
    halves: set[HalfRef] = set()
    for vid, cycle in spec.vertices:
        if vid in seen_vertices:
            raise GraphBuildError(f"duplicate vertex id {vid!r}")
        seen_vertices.add(vid)
        if len(set(cycle)) != len(cycle):
            raise GraphBuildError(f"vertex {vid!r} repeats a half-edge name")
        if not any_degree and len(cycle) != 4:
            raise GraphBuildError(
                f"vertex {vid!r} has degree {len(cycle)}, expected 4 "
                "(pass any_degree to relax)")
        for name in cycle:
            halves.add((vid, name))

    used: dict[HalfRef, str] = {}

    def claim(h: HalfRef, by: str):
        if h not in halves:
            raise GraphBuildError(f"unknown half-edge {h[0]}.{h[1]} in {by}")
        if h in used:
            raise GraphBuildError(
                f"half-edge {h[0]}.{h[1]} used by both {used[h]} and {by}")
        used[h] = by

    seen_ids = set()
    for eid, (h1, h2) in spec.edges:
        if eid in seen_ids:
            raise GraphBuildError(f"duplicate edge id {eid!r}")
        seen_ids.add(eid)
        if h1 == h2:
            raise GraphBuildError(f"edge {eid!r} pairs a half-edge with itself")
        claim(h1, f"edge {eid}")
        claim(h2, f"edge {eid}")
    for xid, h in spec.externals:
        if xid in seen_ids:
            raise GraphBuildError(f"duplicate external id {xid!r}")
        seen_ids.add(xid)
        claim(h, f"external {xid}")

    dangling = halves - set(used)
    if dangling:
        h = min(dangling)
        raise GraphBuildError(f"dangling half-edge {h[0]}.{h[1]}")

    # Connectivity through internal lines only.
    parent = {vid: vid for vid, _ in spec.vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for _, ((v1, _), (v2, _)) in spec.edges:
        parent[find(v1)] = find(v2)
    roots = {find(v) for v, _ in spec.vertices}
    if len(roots) > 1:
        raise GraphBuildError("graph is disconnected")

    return RibbonGraph(spec)


def _next_internal(g: RibbonGraph, h: HalfRef) -> tuple[HalfRef, tuple[str, ...]]:
    """Next internal half-edge counterclockwise, with the externals crossed."""
    vid, name = h
    cycle = g.cycle(vid)
    pos = cycle.index(name)
    marks = []
    for step in range(1, len(cycle) + 1):
        cand = (vid, cycle[(pos + step) % len(cycle)])
        kind = g.owner(cand)[0]
        if kind == "x":
            marks.append(g.owner(cand)[1])
        else:
            return cand, tuple(marks)
    raise InternalCheckError("vertex with no internal half-edge reached")


def topology(g: RibbonGraph) -> tuple[list[Face], TopologySummary]:
    """Faces, genus and broken-face count of a graph.

    Faces are orbits of sigma o alpha over internal half-edge sides; the
    externals crossed during an orbit break that face.  Euler's relation
    2 - 2g = n - L + F fixes the genus and must come out an integer.
    """
    darts = g.internal_darts()
    faces: list[Face] = []
    if not darts:
        # Bare vertex: one face carrying every leg.
        faces.append(Face(sides=(), externals=g.external_ids))
    else:
        remaining = set(darts)
        while remaining:
            start = min(remaining)
            sides = []
            marks: list[str] = []
            h = start
            while True:
                sides.append(h)
                remaining.discard(h)
                h, crossed = _next_internal(g, g.partner(h))
                marks.extend(crossed)
                if h == start:
                    break
            faces.append(Face(sides=tuple(sides), externals=tuple(marks)))
        faces.sort(key=lambda f: f.sides[0])

    F = len(faces)
    euler = g.n - g.L + F
    if euler % 2 != 0:
        raise InternalCheckError(f"non-integer genus: 2-2g = {euler}")
    genus = (2 - euler) // 2
    if genus < 0:
        raise InternalCheckError(f"negative genus {genus}")
    B = sum(1 for f in faces if f.broken)
    summary = TopologySummary(n=g.n, L=g.L, F=F, g=genus, B=B, N=g.N)
    return faces, summary


def contract_to_rosette(g: RibbonGraph, tree: Sequence[int]) -> Rosette:
    """Contract the tree lines one by one, gluing vertex cycles.

    Contracting a line (h_a at u, h_b at v) merges the two cycles into
    (rest of u's cycle after h_a) ++ (rest of v's cycle after h_b); this
    preserves faces, genus and the broken-face pattern, which is asserted
    on the result.
    """
    tree = tuple(tree)
    if len(set(tree)) != len(tree) or len(tree) != g.n - 1:
        raise GraphBuildError(f"tree {tree} does not have n-1 distinct lines")

    cycles: list[list[HalfRef]] = [
        [(vid, name) for name in cycle] for vid, cycle in g.vertices]
    location = {}
    for ci, cyc in enumerate(cycles):
        for h in cyc:
            location[h] = ci

    def rotate_to(cyc: list, h: HalfRef) -> list:
        pos = cyc.index(h)
        return cyc[pos:] + cyc[:pos]

    for index in tree:
        h_a, h_b = g.edge_halves(index)
        ca, cb = location[h_a], location[h_b]
        if ca == cb:
            raise GraphBuildError(
                f"line {g.edge_ids[index - 1]!r} closes a cycle; not a tree")
        merged = rotate_to(cycles[ca], h_a)[1:] + rotate_to(cycles[cb], h_b)[1:]
        cycles[ca] = merged
        cycles[cb] = []
        for h in merged:
            location[h] = ca

    final = [cyc for cyc in cycles if cyc]
    if len(final) != 1:
        raise GraphBuildError("tree does not span the graph")

    word = []
    tree_set = set(tree)
    for h in final[0]:
        owner = g.owner(h)
        if owner[0] == "e":
            if g.edge_index(owner[1]) in tree_set:
                raise InternalCheckError("tree half-edge survived contraction")
            word.append(owner)
        else:
            word.append(owner)

    expected = 2 * (g.L - (g.n - 1)) + g.N
    if len(word) != expected:
        raise InternalCheckError(
            f"rosette word length {len(word)}, expected {expected}")
    if word:
        pivot = word.index(min(word))
        word = word[pivot:] + word[:pivot]

    rosette = Rosette(graph_name=g.name, tree=tree, word=tuple(word))
    _check_rosette_invariants(g, rosette)
    return rosette


def rosette_graph(rosette: Rosette) -> RibbonGraph:
    """The one-vertex ribbon graph a rosette word describes."""
    names = tuple(f"r{i}" for i in range(len(rosette.word)))
    occurrences: dict[str, list[tuple[int, int]]] = {}
    externals = []
    for i, token in enumerate(rosette.word):
        if token[0] == "e":
            occurrences.setdefault(token[1], []).append((token[2], i))
        else:
            externals.append((token[1], ("rose", names[i])))
    edges = []
    for eid in sorted(occurrences):
        occ = sorted(occurrences[eid])
        if len(occ) != 2:
            raise InternalCheckError(f"loop line {eid!r} occurs {len(occ)} times")
        edges.append((eid, (("rose", names[occ[0][1]]), ("rose", names[occ[1][1]]))))
    spec = GraphSpec(name=f"rosette({rosette.graph_name})",
                     vertices=(("rose", names),),
                     edges=tuple(edges),
                     externals=tuple(externals))
    return build_graph(spec, any_degree=True)


def _check_rosette_invariants(g: RibbonGraph, rosette: Rosette) -> None:
    _, before = topology(g)
    _, after = topology(rosette_graph(rosette))
    if (before.g, before.B) != (after.g, after.B):
        raise InternalCheckError(
            f"contraction changed the topology: (g,B) {before.g, before.B} -> "
            f"{after.g, after.B}")
