"""Seiberg-Witten invariants of negative definite plumbing trees, computed three ways."""
from .graph import (GraphError, ParseError, PlumbingGraph, blow_down, blow_up_edge,
                    blow_up_vertex, delete_end_vertex, load_graph, parse_graph, validate)
from .lattice import CharClass, LatticeContext, QVector, build_context

__all__ = [
    "CharClass", "GraphError", "LatticeContext", "ParseError", "PlumbingGraph", "QVector",
    "blow_down", "blow_up_edge", "blow_up_vertex", "build_context", "delete_end_vertex",
    "load_graph", "parse_graph", "validate",
]
