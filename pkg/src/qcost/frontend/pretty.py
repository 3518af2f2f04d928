"""Source printer. ``parse(pretty(p))`` reproduces ``p``."""

from __future__ import annotations

from typing import List

from .ast import (
    Assign, Binary, BoolLit, Call, Consume, Expr, Gate, If, InitQubit, IntLit, Measure,
    Program, Seq, Skip, Stmt, Unary, Var, While, flatten,
)


def expr_text(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        return f"{e.op}{_wrap(e.arg)}"
    return f"{_wrap(e.left)} {e.op} {_wrap(e.right)}"


def _wrap(e: Expr) -> str:
    t = expr_text(e)
    return t if isinstance(e, (IntLit, BoolLit, Var)) else f"({t})"


def _lines(s: Stmt, ind: int) -> List[str]:
    pad = "  " * ind
    out: List[str] = []
    for x in flatten(s):
        if isinstance(x, Skip):
            out.append(pad + "skip;")
        elif isinstance(x, Assign):
            out.append(f"{pad}{x.var} := {expr_text(x.expr)};")
        elif isinstance(x, InitQubit):
            out.append(f"{pad}{x.qubit} := |{x.kind}>;")
        elif isinstance(x, Measure):
            out.append(f"{pad}{x.var} <- meas({x.qubit});")
        elif isinstance(x, Gate):
            out.append(f"{pad}{', '.join(x.qubits)} *= {x.gate};")
        elif isinstance(x, Consume):
            out.append(f"{pad}consume({expr_text(x.expr)});")
        elif isinstance(x, Call):
            out.append(f"{pad}{x.name}({', '.join(x.args)});")
        elif isinstance(x, If):
            out.append(f"{pad}if {expr_text(x.cond)} {{")
            out += _lines(x.then, ind + 1)
            out.append(pad + "} else {")
            out += _lines(x.orelse, ind + 1)
            out.append(pad + "}")
        elif isinstance(x, While):
            out.append(f"{pad}while {expr_text(x.cond)} {{")
            out += _lines(x.body, ind + 1)
            out.append(pad + "}")
        elif isinstance(x, Seq):  # pragma: no cover - flatten removes these
            out += _lines(x, ind)
    return out


def stmt_text(s: Stmt, indent: int = 0) -> str:
    return "\n".join(_lines(s, indent))


def pretty(prog: Program) -> str:
    out = [f"var {name} : {ty};" for name, ty in prog.decls.items()]
    for m in prog.macros.values():
        out.append(f"def {m.name}({', '.join(m.params)}) {{")
        out += _lines(m.body, 1)
        out.append("}")
    out += _lines(prog.body, 0)
    return "\n".join(out) + "\n"
