"""IMQ frontend: parsing, checking, desugaring, printing."""

from .ast import (
    Assign, Binary, BoolLit, Call, Consume, Expr, Gate, If, InitQubit, IntLit, MacroDef,
    Measure, Program, Seq, Skip, Stmt, Unary, Var, While, flatten, loops, seq, walk,
)
from .check import desugar, expand_macros, label_loops, load, load_file, typecheck
from .errors import FrontendError, ParseError, TypeCheckError, UnsupportedFeature
from .parser import parse, parse_expr
from .pretty import expr_text, pretty, stmt_text

__all__ = [
    "Assign", "Binary", "BoolLit", "Call", "Consume", "Expr", "Gate", "If", "InitQubit", "IntLit",
    "MacroDef", "Measure", "Program", "Seq", "Skip", "Stmt", "Unary", "Var", "While", "flatten",
    "loops", "seq", "walk", "desugar", "expand_macros", "label_loops", "load", "load_file",
    "typecheck", "FrontendError", "ParseError", "TypeCheckError", "UnsupportedFeature", "parse",
    "parse_expr", "expr_text", "pretty", "stmt_text",
]
