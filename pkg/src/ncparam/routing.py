"""Spanning-tree and 2-tree enumeration; loop/external momentum routing.

Line orientation runs from the first-listed half-edge of an edge record to
the second; every sign below (loop coefficients, crossing signs read off
rosettes) descends from this single choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import GraphBuildError, InternalCheckError
from .ribbon import RibbonGraph


@dataclass(frozen=True)
class SpanningTree:
    edges: tuple[int, ...]


@dataclass(frozen=True)
class TwoTree:
    """n-2 acyclic lines splitting the vertices into two components.

    ``externals`` is the leg subset attached to the component that does not
    contain the first-declared vertex; the squared momentum sum over it is
    side-independent once total momentum conservation is imposed.
    """

    edges: tuple[int, ...]
    components: tuple[tuple[str, ...], tuple[str, ...]]
    externals: tuple[str, ...]


@dataclass(frozen=True)
class MomentumRouting:
    """Signed loop and external momentum content of every internal line.

    Line l carries sum_j eps[l-1][j-1] * k_j + sum_e eta[l-1][e-1] * p_e.
    Loop j belongs to the j-th non-tree line (ascending line index), which
    carries exactly k_j; tree lines are fixed by momentum conservation, the
    external momenta flowing along tree paths toward the first-declared
    vertex.
    """

    tree: tuple[int, ...]
    loops: tuple[int, ...]
    eps: tuple[tuple[int, ...], ...]
    eta: tuple[tuple[int, ...], ...]


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[rx] = ry
        return True


def _is_forest(g: RibbonGraph, edge_indices) -> _UnionFind | None:
    uf = _UnionFind(g.vertex_ids)
    for index in edge_indices:
        v1, v2 = g.edge_endpoints(index)
        if not uf.union(v1, v2):
            return None
    return uf


def spanning_trees(g: RibbonGraph) -> list[SpanningTree]:
    """All spanning trees, ordered lexicographically on edge-index tuples."""
    need = g.n - 1
    candidates = [i for i in range(1, g.L + 1)
                  if g.edge_endpoints(i)[0] != g.edge_endpoints(i)[1]]
    trees = []
    for combo in combinations(candidates, need):
        if _is_forest(g, combo) is not None:
            trees.append(SpanningTree(edges=combo))
    trees.sort(key=lambda t: t.edges)
    return trees


def two_trees(g: RibbonGraph) -> list[TwoTree]:
    """All 2-trees with their external-leg sets; empty for one-vertex graphs."""
    if g.n < 2:
        return []
    root = g.vertex_ids[0]
    result = []
    candidates = [i for i in range(1, g.L + 1)
                  if g.edge_endpoints(i)[0] != g.edge_endpoints(i)[1]]
    for combo in combinations(candidates, g.n - 2):
        uf = _is_forest(g, combo)
        if uf is None:
            continue
        root_rep = uf.find(root)
        side_root = tuple(v for v in g.vertex_ids if uf.find(v) == root_rep)
        side_other = tuple(v for v in g.vertex_ids if uf.find(v) != root_rep)
        if len({uf.find(v) for v in side_other}) != 1:
            continue  # more than two components
        exts = tuple(x for x, (v, _) in g.externals if v in set(side_other))
        result.append(TwoTree(edges=combo,
                              components=(side_root, side_other),
                              externals=exts))
    result.sort(key=lambda t: t.edges)
    return result


def route_momenta(g: RibbonGraph, tree: SpanningTree) -> MomentumRouting:
    """Assign loop and external momentum content to every line.

    The content of a tree line t is found by cutting t: summing conservation
    over the component on t's head side B gives

        q_t = -P_B + sum_{non-tree lines B->A} k_j - sum_{A->B} k_j,

    with P_B the external momentum entering B.
    """
    tree_edges = tuple(tree.edges)
    if _is_forest(g, tree_edges) is None or len(tree_edges) != g.n - 1:
        raise GraphBuildError(f"{tree_edges} is not a spanning tree")
    loops = tuple(i for i in range(1, g.L + 1) if i not in set(tree_edges))
    n_loops = len(loops)
    loop_pos = {line: j for j, line in enumerate(loops)}

    eps = [[0] * n_loops for _ in range(g.L)]
    eta = [[0] * g.N for _ in range(g.L)]
    for line in loops:
        eps[line - 1][loop_pos[line]] = 1

    for t in tree_edges:
        others = [e for e in tree_edges if e != t]
        uf = _is_forest(g, others)
        head = g.edge_endpoints(t)[1]
        head_rep = uf.find(head)
        in_b = {v for v in g.vertex_ids if uf.find(v) == head_rep}
        for line in loops:
            tail_v, head_v = g.edge_endpoints(line)
            if tail_v in in_b and head_v not in in_b:
                eps[t - 1][loop_pos[line]] += 1
            elif tail_v not in in_b and head_v in in_b:
                eps[t - 1][loop_pos[line]] -= 1
        for e in range(1, g.N + 1):
            if g.ext_vertex(e) in in_b:
                eta[t - 1][e - 1] -= 1

    routing = MomentumRouting(tree=tree_edges, loops=loops,
                              eps=tuple(tuple(r) for r in eps),
                              eta=tuple(tuple(r) for r in eta))
    _check_conservation(g, routing)
    return routing


def _check_conservation(g: RibbonGraph, routing: MomentumRouting) -> None:
    """Signed line contents must balance the externals at every vertex,
    modulo the overall delta(sum p) which is removed by eliminating p_N."""
    n_loops = len(routing.loops)
    for vid in g.vertex_ids:
        balance_k = [0] * n_loops
        balance_p = [0] * g.N
        for line in range(1, g.L + 1):
            tail, head = g.edge_endpoints(line)
            for sign, end in ((1, tail), (-1, head)):
                if end != vid:
                    continue
                for j in range(n_loops):
                    balance_k[j] += sign * routing.eps[line - 1][j]
                for e in range(g.N):
                    balance_p[e] += sign * routing.eta[line - 1][e]
        for e in range(1, g.N + 1):
            if g.ext_vertex(e) == vid:
                balance_p[e - 1] -= 1
        # Impose sum(p) = 0 by eliminating the last momentum.
        if g.N:
            last = balance_p[-1]
            balance_p = [b - last for b in balance_p[:-1]]
        if any(balance_k) or any(balance_p):
            raise InternalCheckError(f"momentum conservation fails at {vid!r}")
