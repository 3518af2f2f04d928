"""Macro expansion, type checking, desugaring and loop labelling."""

from __future__ import annotations

from typing import Callable, Dict, List, Optional

from ..arith import is_density_var
from ..density import GATE_ARITY, MAX_QUBITS
from .ast import (
    Assign, Binary, BoolLit, Call, Consume, Expr, Gate, If, InitQubit, IntLit, Measure,
    Program, Seq, Skip, Stmt, Unary, Var, While, seq, walk,
)
from .errors import TypeCheckError
from .parser import parse


def map_stmt(s: Stmt, f: Callable[[Stmt], Optional[Stmt]]) -> Stmt:
    """Bottom-up rebuild; ``f`` may return a replacement or None to keep."""
    if isinstance(s, Seq):
        s = Seq(map_stmt(s.first, f), map_stmt(s.second, f))
    elif isinstance(s, If):
        s = If(s.cond, map_stmt(s.then, f), map_stmt(s.orelse, f))
    elif isinstance(s, While):
        s = While(s.cond, map_stmt(s.body, f), s.loc)
    r = f(s)
    return s if r is None else r


def rename_expr(e: Expr, ren: Dict[str, str]) -> Expr:
    if isinstance(e, Var):
        return Var(ren.get(e.name, e.name))
    if isinstance(e, Unary):
        return Unary(e.op, rename_expr(e.arg, ren))
    if isinstance(e, Binary):
        return Binary(e.op, rename_expr(e.left, ren), rename_expr(e.right, ren))
    return e


def rename_stmt(s: Stmt, ren: Dict[str, str]) -> Stmt:
    r = lambda x: ren.get(x, x)  # noqa: E731

    def f(x: Stmt):
        if isinstance(x, Assign):
            return Assign(r(x.var), rename_expr(x.expr, ren))
        if isinstance(x, Measure):
            return Measure(r(x.var), r(x.qubit))
        if isinstance(x, InitQubit):
            return InitQubit(r(x.qubit), x.kind)
        if isinstance(x, Gate):
            return Gate(x.gate, tuple(r(q) for q in x.qubits))
        if isinstance(x, Consume):
            return Consume(rename_expr(x.expr, ren))
        if isinstance(x, If):
            return If(rename_expr(x.cond, ren), x.then, x.orelse)
        if isinstance(x, While):
            return While(rename_expr(x.cond, ren), x.body, x.loc)
        if isinstance(x, Call):
            return Call(x.name, tuple(r(a) for a in x.args))
        return None

    return map_stmt(s, f)


def expand_macros(prog: Program) -> Program:
    """Inline every macro call. Macro bodies may call earlier macros."""

    def expand(s: Stmt, stack: List[str]) -> Stmt:
        def f(x: Stmt):
            if not isinstance(x, Call):
                return None
            m = prog.macros.get(x.name)
            if m is None:
                raise TypeCheckError(f"call to undefined macro '{x.name}'")
            if x.name in stack:
                raise TypeCheckError(f"recursive macro '{x.name}'")
            if len(x.args) != len(m.params):
                raise TypeCheckError(
                    f"macro '{x.name}' expects {len(m.params)} arguments, got {len(x.args)}")
            body = rename_stmt(m.body, dict(zip(m.params, x.args)))
            return expand(body, stack + [x.name])

        return map_stmt(s, f)

    return Program(dict(prog.decls), expand(prog.body, []), {})


def _reserved(name: str) -> bool:
    return name.startswith("_") or is_density_var(name)


class _Checker:
    def __init__(self, decls: Dict[str, str]):
        self.decls = decls

    def expr(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return "int"
        if isinstance(e, BoolLit):
            return "bool"
        if isinstance(e, Var):
            ty = self.decls.get(e.name)
            if ty is None:
                raise TypeCheckError(f"undeclared variable '{e.name}'")
            if ty == "qubit":
                raise TypeCheckError(f"qubit '{e.name}' used in a classical expression")
            return ty
        if isinstance(e, Unary):
            want = "int" if e.op == "-" else "bool"
            if self.expr(e.arg) != want:
                raise TypeCheckError(f"operator '{e.op}' expects {want}")
            return want
        lt, rt = self.expr(e.left), self.expr(e.right)
        if e.op in ("+", "-", "*"):
            if lt != "int" or rt != "int":
                raise TypeCheckError(f"operator '{e.op}' expects int operands")
            return "int"
        if e.op in ("&&", "||"):
            if lt != "bool" or rt != "bool":
                raise TypeCheckError(f"operator '{e.op}' expects bool operands")
            return "bool"
        if e.op in ("==", "!="):
            if lt != rt:
                raise TypeCheckError(f"operator '{e.op}' compares {lt} with {rt}")
            return "bool"
        if lt != "int" or rt != "int":
            raise TypeCheckError(f"operator '{e.op}' expects int operands")
        return "bool"

    def var(self, name: str, want: str, what: str):
        ty = self.decls.get(name)
        if ty is None:
            raise TypeCheckError(f"undeclared variable '{name}'")
        if ty != want:
            raise TypeCheckError(f"{what} '{name}' must be {want}, not {ty}")

    def stmt(self, s: Stmt):
        for x in walk(s):
            if isinstance(x, Assign):
                ty = self.decls.get(x.var)
                if ty is None:
                    raise TypeCheckError(f"undeclared variable '{x.var}'")
                if ty == "qubit":
                    raise TypeCheckError(f"cannot assign a classical value to qubit '{x.var}'")
                et = self.expr(x.expr)
                if et != ty:
                    raise TypeCheckError(f"assigning {et} to {ty} variable '{x.var}'")
            elif isinstance(x, Measure):
                self.var(x.var, "bool", "measurement result")
                self.var(x.qubit, "qubit", "measured variable")
            elif isinstance(x, InitQubit):
                self.var(x.qubit, "qubit", "initialised variable")
            elif isinstance(x, Gate):
                for q in x.qubits:
                    self.var(q, "qubit", "gate operand")
                if len(set(x.qubits)) != len(x.qubits):
                    raise TypeCheckError(f"gate {x.gate} applied to repeated qubits")
                if len(x.qubits) != GATE_ARITY[x.gate]:
                    raise TypeCheckError(
                        f"gate {x.gate} acts on {GATE_ARITY[x.gate]} qubits, got {len(x.qubits)}")
            elif isinstance(x, Consume):
                if self.expr(x.expr) != "int":
                    raise TypeCheckError("consume expects an int expression")
            elif isinstance(x, (If, While)):
                if self.expr(x.cond) != "bool":
                    raise TypeCheckError("condition must be bool")
            elif isinstance(x, Call):
                raise TypeCheckError(f"unexpanded macro call '{x.name}'")


def typecheck(prog: Program) -> Program:
    for name in prog.decls:
        if _reserved(name):
            raise TypeCheckError(f"identifier '{name}' is reserved")
    if prog.n_qubits > MAX_QUBITS:
        raise TypeCheckError(f"at most {MAX_QUBITS} qubits are supported, got {prog.n_qubits}")
    _Checker(prog.decls).stmt(prog.body)
    return prog


def desugar(prog: Program) -> Program:
    """Replace q := |0> and q := |+> by measurement and correction.

    Each initialisation gets its own fresh bool for the discarded outcome.
    """
    decls = dict(prog.decls)
    counter = [0]

    def fresh(q: str) -> str:
        while True:
            counter[0] += 1
            name = f"{q}_init{counter[0]}"
            if name not in decls:
                decls[name] = "bool"
                return name

    def f(x: Stmt):
        if not isinstance(x, InitQubit):
            return None
        m = fresh(x.qubit)
        out = [Measure(m, x.qubit), If(Var(m), Gate("X", (x.qubit,)), Skip())]
        if x.kind == "+":
            out.append(Gate("H", (x.qubit,)))
        return seq(out)

    body = map_stmt(prog.body, f)
    return Program(decls, body, {})


def label_loops(prog: Program) -> Program:
    """Name loops L1, L2, ... in pre-order."""
    counter = [0]

    def go(s: Stmt) -> Stmt:
        if isinstance(s, Seq):
            a = go(s.first)
            return Seq(a, go(s.second))
        if isinstance(s, If):
            a = go(s.then)
            return If(s.cond, a, go(s.orelse))
        if isinstance(s, While):
            counter[0] += 1
            loc = f"L{counter[0]}"
            return While(s.cond, go(s.body), loc)
        return s

    return Program(dict(prog.decls), go(prog.body), {})


def load(src: str) -> Program:
    """Parse, expand, check, desugar and label: the analysable core program."""
    prog = parse(src)
    prog = expand_macros(prog)
    typecheck(prog)
    return label_loops(desugar(prog))


def load_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())
