"""Boolean-network language, synchronous compilation and the p53 fixtures."""

from .network import (MAX_NODES, Attractors, SizeCapExceeded, attractor_analysis, compile_network,
                      evaluate, iterate_map)
from .parser import (BinOp, BooleanNetwork, BoolExpr, BoolNetSyntaxError, Const, Not, Var,
                     format_expr, format_network, parse_expr, parse_network)

compile = compile_network

__all__ = [
    "MAX_NODES", "Attractors", "SizeCapExceeded", "attractor_analysis", "compile", "compile_network",
    "evaluate", "iterate_map", "BinOp", "BooleanNetwork", "BoolExpr", "BoolNetSyntaxError", "Const",
    "Not", "Var", "format_expr", "format_network", "parse_expr", "parse_network",
]
