"""Graph-description parsing, report emission, numeric integrand evaluation.

File format (``#`` starts a comment)::

    vertex <id>: <h> <h> <h> <h>     # counterclockwise cyclic order
    edge   <id>: <v>.<h> <v>.<h>     # oriented first -> second
    ext    <id>: <v>.<h>             # legs are numbered in declaration order
    param  theta=<rat|sym> a=<rat|sym> m2=<rat|sym> D=<even int>

Floats exist only in this module; the symbolic core never sees them.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Mapping

from .errors import (ConstraintError, GraphBuildError, GraphParseError,
                     InternalCheckError, NcparamError, StructuralError)
from .ncamp import (AmplitudeExpansion, ModelParameters, PowerCounting,
                    expand_amplitude, power_counting, split_propagator)
from .poly import Polynomial, VariableRegistry
from .ribbon import GraphSpec, RibbonGraph, build_graph, topology
from .routing import SpanningTree, spanning_trees
from .symanzik import symanzik_pair


def parse_graph_file(text: str, any_degree: bool = False) -> tuple[RibbonGraph, ModelParameters]:
    """Parse and validate a graph description.

    Raises GraphParseError with a source location for syntax problems and
    GraphBuildError for semantic ones.
    """
    vertices: list[tuple[str, tuple[str, ...]]] = []
    edges = []
    externals = []
    params: dict[str, object] = {}
    seen_param = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head in ("vertex", "edge", "ext"):
            name, sep, body = rest.partition(":")
            name = name.strip()
            if not sep or not name or " " in name:
                raise GraphParseError(f"expected '{head} <id>: ...'",
                                      lineno, raw.find(rest) + 1)
            fields = body.split()
            if head == "vertex":
                if not fields:
                    raise GraphParseError(f"vertex {name!r} lists no half-edges",
                                          lineno, 1)
                vertices.append((name, tuple(fields)))
            elif head == "edge":
                if len(fields) != 2:
                    raise GraphParseError(
                        f"edge {name!r} needs exactly two half-edges", lineno, 1)
                edges.append((name, (_half_ref(fields[0], lineno, raw),
                                     _half_ref(fields[1], lineno, raw))))
            else:
                if len(fields) != 1:
                    raise GraphParseError(
                        f"external {name!r} needs exactly one half-edge", lineno, 1)
                externals.append((name, _half_ref(fields[0], lineno, raw)))
        elif head == "param":
            if seen_param:
                raise GraphParseError("duplicate param line", lineno, 1)
            seen_param = True
            for item in rest.split():
                key, sep, value = item.partition("=")
                if not sep:
                    raise GraphParseError(f"expected key=value, got {item!r}",
                                          lineno, raw.find(item) + 1)
                if key not in ("theta", "a", "m2", "D"):
                    raise GraphParseError(f"unknown parameter {key!r}",
                                          lineno, raw.find(item) + 1)
                params[key] = _param_value(key, value, lineno, raw.find(item) + 1)
        else:
            raise GraphParseError(f"unknown directive {head!r}", lineno, 1)

    if not vertices:
        raise GraphParseError("no vertices", None, None)

    spec = GraphSpec(name="graph", vertices=tuple(vertices),
                     edges=tuple(edges), externals=tuple(externals))
    graph = build_graph(spec, any_degree=any_degree)
    model = ModelParameters(m_sq=params.get("m2"), theta=params.get("theta"),
                            a=params.get("a"), D=params.get("D", 4))
    return graph, model


def _half_ref(token: str, lineno: int, raw: str) -> tuple[str, str]:
    vertex, sep, half = token.partition(".")
    if not sep or not vertex or not half:
        raise GraphParseError(f"expected <vertex>.<half>, got {token!r}",
                              lineno, raw.find(token) + 1)
    return (vertex, half)


def _param_value(key: str, value: str, lineno: int, col: int):
    if key == "D":
        try:
            return int(value)
        except ValueError:
            raise GraphParseError(f"D must be an integer, got {value!r}",
                                  lineno, col) from None
    if value == "sym":
        return None
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise GraphParseError(
            f"{key} must be a rational or 'sym', got {value!r}", lineno, col) from None


def format_graph_file(g: RibbonGraph, params: ModelParameters) -> str:
    """Canonical text form; parsing it reproduces the same graph."""
    lines = []
    for vid, cycle in g.vertices:
        lines.append(f"vertex {vid}: " + " ".join(cycle))
    for eid, (h1, h2) in g.edges:
        lines.append(f"edge {eid}: {h1[0]}.{h1[1]} {h2[0]}.{h2[1]}")
    for xid, h in g.externals:
        lines.append(f"ext {xid}: {h[0]}.{h[1]}")
    parts = []
    for key, value in (("theta", params.theta), ("a", params.a),
                       ("m2", params.m_sq)):
        parts.append(f"{key}={'sym' if value is None else value}")
    parts.append(f"D={params.D}")
    lines.append("param " + " ".join(parts))
    return "\n".join(lines) + "\n"


# -- report emission ---------------------------------------------------------


def _report_dict(expansion: AmplitudeExpansion, pc: PowerCounting) -> dict:
    g = expansion.graph
    _, summary = topology(g)
    pair = symanzik_pair(g, expansion.registry)
    return {
        "graph": g.name,
        "topology": {"n": summary.n, "L": summary.L, "F": summary.F,
                     "g": summary.g, "B": summary.B, "N": summary.N},
        "commutative": {"U": str(pair.U), "V": str(pair.V)},
        "prefactor": {"L": expansion.prefactor[0], "D": expansion.prefactor[1]},
        "terms": [
            {
                "subset": list(term.subset),
                "sign": term.sign,
                "prefactorPower": term.prefactor_power,
                "Utheta": str(term.utheta),
                "W": str(term.w),
                "massExponent": str(term.mass_exponent),
            }
            for term in expansion.terms
        ],
        "powerCounting": {"minDeg": pc.min_deg, "omega": pc.omega,
                          "closedFormOmega": pc.closed_form},
    }


def emit_report(expansion: AmplitudeExpansion, pc: PowerCounting,
                fmt: str = "json") -> bytes:
    """Deterministic report; identical inputs give identical bytes."""
    data = _report_dict(expansion, pc)
    if fmt == "json":
        return (json.dumps(data, indent=2) + "\n").encode("utf-8")
    if fmt != "text":
        raise StructuralError(f"unknown format {fmt!r}")
    top = data["topology"]
    lines = [
        f"graph {data['graph']}: n={top['n']} L={top['L']} F={top['F']} "
        f"g={top['g']} B={top['B']} N={top['N']}",
        f"commutative: U = {data['commutative']['U']}",
        f"             V = {data['commutative']['V']}",
        f"prefactor: pi^(L*D/2) with L={data['prefactor']['L']} "
        f"D={data['prefactor']['D']}",
        "",
        "amplitude = prefactor * sum of the terms below, each integrated",
        "over its positive parameters with the measure",
        "  Utheta^(-D/2) * exp(-W/Utheta) * exp(-M) * d(alpha...)",
        "",
    ]
    for term in data["terms"]:
        subset = "{" + ",".join(str(i) for i in term["subset"]) + "}"
        sign = "+" if term["sign"] > 0 else "-"
        lines.append(f"term S={subset} sign={sign}1 "
                     f"(a/theta^2)^{term['prefactorPower']}")
        lines.append(f"  Utheta = {term['Utheta']}")
        lines.append(f"  W      = {term['W']}")
        lines.append(f"  M      = {term['massExponent']}")
    pcd = data["powerCounting"]
    closed = pcd["closedFormOmega"]
    lines.append("")
    lines.append(f"power counting: minDeg={pcd['minDeg']} omega={pcd['omega']}"
                 + (f" closedForm={closed}" if closed is not None else "")
                 + ("  [UV-divergent]" if pcd["omega"] <= 0 else ""))
    return ("\n".join(lines) + "\n").encode("utf-8")


# -- numeric evaluation -------------------------------------------------------


def eval_integrand(expansion: AmplitudeExpansion, term_mask: int,
                   point: Mapping[str, float]) -> float:
    """Evaluate one term's integrand at a numeric point, double precision.

    The point assigns every alpha-type variable of the term, theta, the
    coupling ``a``, ``msq``, and the s-invariants; file-level numeric
    parameters fill in anything not given.  The auxiliary masses come from
    the propagator split.
    """
    if not 0 <= term_mask < 2 ** expansion.graph.L:
        raise StructuralError(f"term mask {term_mask} out of range")
    term = expansion.terms[term_mask]
    reg = expansion.registry

    values = dict(point)
    defaults = (("theta", expansion.params.theta), ("a", expansion.params.a),
                ("msq", expansion.params.m_sq))
    for name, val in defaults:
        if name not in values and val is not None:
            values[name] = float(val)

    for i in range(1, expansion.graph.L + 1):
        alpha = values.get(f"a{i}")
        if alpha is not None and alpha <= 0:
            raise ConstraintError(f"a{i} must be positive, got {alpha}")
        for which in (1, 2):
            corr = values.get(f"a{i}_{which}")
            if corr is not None and corr <= 0 and i in term.subset:
                raise ConstraintError(f"a{i}_{which} must be positive")

    needs_split = term.prefactor_power > 0 or term.mass_exponent.has_any(
        ["m1sq", "m2sq"])
    if needs_split or ("theta" in values and "a" in values and "msq" in values):
        try:
            numeric = ModelParameters(
                m_sq=Fraction(values["msq"]).limit_denominator(10 ** 12),
                theta=Fraction(values["theta"]).limit_denominator(10 ** 12),
                a=Fraction(values["a"]).limit_denominator(10 ** 12),
                D=expansion.params.D)
        except KeyError as exc:
            raise StructuralError(
                f"numeric evaluation needs a value for {exc.args[0]!r}") from None
        spectrum = split_propagator(numeric, policy="float")
        values.setdefault("m1sq", spectrum.m1_sq)
        values.setdefault("m2sq", spectrum.m2_sq)

    u = term.utheta.evaluate_float(values)
    w = term.w.evaluate_float(values)
    mass = term.mass_exponent.evaluate_float(values)
    if u <= 0:
        raise ConstraintError(f"Utheta evaluates to {u}; the point must lie "
                              "in the positive orthant")
    coupling = 1.0
    if term.prefactor_power:
        coupling = (values["a"] / values["theta"] ** 2) ** term.prefactor_power
    return (term.sign * coupling * u ** (-expansion.params.D / 2)
            * math.exp(-w / u) * math.exp(-mass))


# -- command line ------------------------------------------------------------


def _parse_tree_flag(g: RibbonGraph, flag: str) -> SpanningTree:
    ids = [t.strip() for t in flag.split(",") if t.strip()]
    try:
        indices = tuple(sorted(g.edge_index(eid) for eid in ids))
    except KeyError as exc:
        raise GraphBuildError(f"unknown edge id {exc.args[0]!r} in --tree") from None
    for tree in spanning_trees(g):
        if tree.edges == indices:
            return tree
    raise GraphBuildError(f"--tree {flag!r} is not a spanning tree")


def _parse_point(flag: str) -> dict[str, float]:
    point = {}
    for item in flag.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise GraphBuildError(f"expected name=value in --point, got {item!r}")
        try:
            point[key.strip()] = float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise GraphBuildError(f"bad numeric value in --point: {item!r}") from None
    return point


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncparam",
        description="Parametric representation of ribbon-graph amplitudes "
                    "on Moyal space")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="full symbolic report for a graph file")
    analyze.add_argument("file")
    analyze.add_argument("--D", type=int, default=None,
                         help="override the space dimension (even)")
    analyze.add_argument("--format", choices=("json", "text"), default="json")
    analyze.add_argument("--any-degree", action="store_true",
                         help="allow vertices of degree other than 4")
    analyze.add_argument("--tree", default=None,
                         help="comma-separated edge ids of the spanning tree "
                              "to route with (result is tree-independent)")

    ev = sub.add_parser("eval", help="evaluate one term's integrand numerically")
    ev.add_argument("file")
    ev.add_argument("--term", type=int, required=True,
                    help="subset bitmask (bit i-1 marks line i as corrected)")
    ev.add_argument("--point", required=True,
                    help="comma-separated name=value assignments")
    ev.add_argument("--D", type=int, default=None)
    ev.add_argument("--any-degree", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        graph, params = parse_graph_file(text, any_degree=args.any_degree)
        if args.D is not None:
            params = ModelParameters(m_sq=params.m_sq, theta=params.theta,
                                     a=params.a, D=args.D)
        if args.command == "analyze":
            tree = _parse_tree_flag(graph, args.tree) if args.tree else None
            expansion = expand_amplitude(graph, params, tree=tree)
            pc = power_counting(graph, params, expansion)
            sys.stdout.buffer.write(emit_report(expansion, pc, args.format))
            sys.stdout.buffer.flush()
        else:
            expansion = expand_amplitude(graph, params)
            value = eval_integrand(expansion, args.term, _parse_point(args.point))
            print(repr(value))
    except (GraphParseError, GraphBuildError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConstraintError as exc:
        print(f"constraint violation: {exc}", file=sys.stderr)
        return 3
    except InternalCheckError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 4
    except NcparamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
