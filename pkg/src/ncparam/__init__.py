"""Exact Schwinger-parametric representation of ribbon-graph amplitudes for
the translation-invariant noncommutative scalar model on Moyal space."""

from .errors import (ConstraintError, GraphBuildError, GraphParseError,
                     InternalCheckError, NcparamError, StructuralError)
from .poly import (Polynomial, RationalFunction, VariableRegistry, divexact,
                   parse_polynomial, poly_det)
from .ribbon import (Face, GraphSpec, RibbonGraph, Rosette, TopologySummary,
                     build_graph, contract_to_rosette, rosette_graph, topology)
from .routing import (MomentumRouting, SpanningTree, TwoTree, route_momenta,
                      spanning_trees, two_trees)
from .symanzik import (SymanzikPair, external_momentum_square, matrix_tree_u,
                       symanzik_pair, symanzik_u, symanzik_v)
from .ncamp import (AmplitudeExpansion, AmplitudeTerm, MassSpectrum,
                    ModelParameters, PhaseData, PowerCounting,
                    expand_amplitude, first_polynomial, gaussian_reduce,
                    line_betas, power_counting, propagator_split_residual,
                    propagator_split_residual_float, rosette_phase_data,
                    split_propagator)
from .cli import (emit_report, eval_integrand, format_graph_file, main,
                  parse_graph_file)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeExpansion", "AmplitudeTerm", "ConstraintError", "Face",
    "GraphBuildError", "GraphParseError", "GraphSpec", "InternalCheckError",
    "MassSpectrum", "ModelParameters", "MomentumRouting", "NcparamError",
    "PhaseData", "Polynomial", "PowerCounting", "RationalFunction",
    "RibbonGraph", "Rosette", "SpanningTree", "StructuralError",
    "SymanzikPair", "TopologySummary", "TwoTree", "VariableRegistry",
    "build_graph", "contract_to_rosette", "divexact", "emit_report",
    "eval_integrand", "expand_amplitude", "external_momentum_square",
    "first_polynomial", "format_graph_file", "gaussian_reduce", "line_betas",
    "main", "matrix_tree_u", "parse_graph_file", "parse_polynomial",
    "poly_det", "power_counting", "propagator_split_residual",
    "propagator_split_residual_float", "rosette_graph", "rosette_phase_data",
    "route_momenta", "spanning_trees", "split_propagator", "symanzik_pair",
    "symanzik_u", "symanzik_v", "topology", "two_trees",
]
