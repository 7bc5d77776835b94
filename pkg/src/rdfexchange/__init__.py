"""Relational-to-RDF data exchange under shape constraints."""

from .model import (LITERAL, ConstLit, Iri, IriConstructor, Mult, NullIri,
                    NullLit, Setting, SourceInstance, TypedGraph, make_iri)
from .textio import (ParseError, parse_graph, parse_instance, parse_setting,
                     render_graph)
from .chase import check_pf, core_pre_solution, fd_chase, validate_shapes
from .consistency import check_consistency, materialize_counterexample
from .solution import universal_solution
from .query import certain_bool, certain_pairs, eval_nre, parse_nre

__all__ = [
    "LITERAL", "ConstLit", "Iri", "IriConstructor", "Mult", "NullIri", "NullLit",
    "Setting", "SourceInstance", "TypedGraph", "make_iri", "ParseError",
    "parse_graph", "parse_instance", "parse_setting", "render_graph", "check_pf",
    "core_pre_solution", "fd_chase", "validate_shapes", "check_consistency",
    "materialize_counterexample", "universal_solution", "certain_bool",
    "certain_pairs", "eval_nre", "parse_nre",
]
