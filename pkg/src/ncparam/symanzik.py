"""Commutative graph polynomials: the spanning-tree sum U, the 2-tree sum V,
and an independent matrix-tree oracle for U."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .poly import Polynomial, VariableRegistry, poly_det
from .ribbon import RibbonGraph
from .routing import SpanningTree, route_momenta, spanning_trees, two_trees


@dataclass(frozen=True)
class SymanzikPair:
    U: Polynomial
    V: Polynomial


def external_momentum_square(reg: VariableRegistry, coeffs: Sequence[int],
                             n_externals: int) -> Polynomial:
    """(sum_e c_e p_e)^2 expanded over the s-invariants.

    The last momentum is eliminated first via sum(p) = 0, so the result only
    involves s_e_f with e <= f < N.
    """
    if len(coeffs) != n_externals:
        raise ValueError("one coefficient per external leg expected")
    if n_externals == 0:
        return Polynomial.zero(reg)
    reduced = [c - coeffs[-1] for c in coeffs[:-1]]
    out = Polynomial.zero(reg)
    for e in range(len(reduced)):
        if reduced[e]:
            out = out + reduced[e] * reduced[e] * reg.s(e + 1, e + 1)
        for f in range(e + 1, len(reduced)):
            c = reduced[e] * reduced[f]
            if c:
                out = out + 2 * c * reg.s(e + 1, f + 1)
    return out


def symanzik_u(g: RibbonGraph, reg: VariableRegistry) -> Polynomial:
    """U = sum over spanning trees of the product of off-tree parameters."""
    out = Polynomial.zero(reg)
    for tree in spanning_trees(g):
        in_tree = set(tree.edges)
        prod = Polynomial.one(reg)
        for line in range(1, g.L + 1):
            if line not in in_tree:
                prod = prod * reg.alpha(line)
        out = out + prod
    return out


def symanzik_v(g: RibbonGraph, reg: VariableRegistry) -> Polynomial:
    """V = sum over 2-trees of the off-tree product times the squared
    momentum entering the cut; identically zero for one-vertex graphs."""
    out = Polynomial.zero(reg)
    for tt in two_trees(g):
        kept = set(tt.edges)
        prod = Polynomial.one(reg)
        for line in range(1, g.L + 1):
            if line not in kept:
                prod = prod * reg.alpha(line)
        coeffs = [0] * g.N
        for xid in tt.externals:
            coeffs[g.ext_index(xid) - 1] = 1
        out = out + prod * external_momentum_square(reg, coeffs, g.N)
    return out


def loop_form_matrix(g: RibbonGraph, reg: VariableRegistry,
                     weights: Sequence[Polynomial],
                     tree: SpanningTree | None = None) -> list[list[Polynomial]]:
    """The weighted loop Gram matrix M[j][k] = sum_l w_l eps[l][j] eps[l][k]."""
    if tree is None:
        tree = spanning_trees(g)[0]
    routing = route_momenta(g, tree)
    n_loops = len(routing.loops)
    matrix = [[Polynomial.zero(reg) for _ in range(n_loops)]
              for _ in range(n_loops)]
    for line in range(1, g.L + 1):
        row = routing.eps[line - 1]
        for j in range(n_loops):
            if not row[j]:
                continue
            for k in range(n_loops):
                if row[k]:
                    matrix[j][k] = matrix[j][k] + row[j] * row[k] * weights[line - 1]
    return matrix


def matrix_tree_u(g: RibbonGraph, reg: VariableRegistry,
                  tree: SpanningTree | None = None) -> Polynomial:
    """U as the determinant of the alpha-weighted loop Gram matrix.

    Independent oracle for :func:`symanzik_u`; the two must agree exactly
    for every connected graph and every choice of tree.
    """
    weights = [reg.alpha(i) for i in range(1, g.L + 1)]
    matrix = loop_form_matrix(g, reg, weights, tree)
    if not matrix:
        return Polynomial.one(reg)
    return poly_det(matrix)


def symanzik_pair(g: RibbonGraph, reg: VariableRegistry) -> SymanzikPair:
    return SymanzikPair(U=symanzik_u(g, reg), V=symanzik_v(g, reg))
