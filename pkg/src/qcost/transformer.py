"""Backward symbolic expectation transformer.

``Transformer.infer(stmt, t)`` returns the expectation term for running
``stmt`` before a continuation ``t`` together with the side-conditions
that loops inside ``stmt`` impose on their unknown expectations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from . import density
from .arith import Poly, QSqrt2, RatFun, parse_density_var
from .expect import formula as F
from .expect import terms as T
from .expect.cost import CostExpr
from .expect.formula import Formula
from .expect.terms import SymState, Term, TFun
from .frontend.ast import (
    Assign, Binary, BoolLit, Consume, Expr, Gate, If, IntLit, Measure, Program, Seq, Skip,
    Stmt, Unary, Var, While, assigned_vars, expr_vars, walk,
)
from .frontend.check import map_stmt


@dataclass(frozen=True)
class SideCondition:
    """``ctx |- lhs >= rhs`` with ``lhs`` the loop's unknown at its entry state."""

    ctx: Formula
    lhs: TFun
    rhs: Term

    def __str__(self):
        return f"{self.ctx} |- {self.lhs.loc}{self.lhs.state} >=\n{T.term_text(self.rhs, 1)}"


class ExprConv:
    """Classical expressions to rational functions and formulas."""

    def __init__(self, decls: Mapping[str, str]):
        self.decls = decls

    def is_bool(self, e: Expr) -> bool:
        if isinstance(e, BoolLit):
            return True
        if isinstance(e, Var):
            return self.decls.get(e.name) == "bool"
        if isinstance(e, Unary):
            return e.op == "!"
        if isinstance(e, Binary):
            return e.op in ("&&", "||", "==", "!=", "<", "<=", ">", ">=")
        return False

    def arith(self, e: Expr) -> RatFun:
        if isinstance(e, IntLit):
            return RatFun.const(e.value)
        if isinstance(e, Var):
            return RatFun.var(e.name)
        if isinstance(e, Unary) and e.op == "-":
            return -self.arith(e.arg)
        if isinstance(e, Binary) and e.op in ("+", "-", "*"):
            l, r = self.arith(e.left), self.arith(e.right)
            return l + r if e.op == "+" else l - r if e.op == "-" else l * r
        raise TypeError(f"not an integer expression: {e}")

    def boolean(self, e: Expr) -> Formula:
        if isinstance(e, BoolLit):
            return F.TRUE if e.value else F.FALSE
        if isinstance(e, Var):
            return F.bvar(e.name)
        if isinstance(e, Unary) and e.op == "!":
            return F.neg(self.boolean(e.arg))
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return F.conj(self.boolean(e.left), self.boolean(e.right))
            if op == "||":
                return F.disj(self.boolean(e.left), self.boolean(e.right))
            if op in ("==", "!=") and self.is_bool(e.left):
                f = F.iff(self.boolean(e.left), self.boolean(e.right))
                return f if op == "==" else F.neg(f)
            l, r = self.arith(e.left), self.arith(e.right)
            if op == "==":
                return F.atom(l - r, "==", True)
            if op == "!=":
                return F.neg(F.atom(l - r, "==", True))
            if op == "<":
                return F.atom(r - l, ">", True)
            if op == "<=":
                return F.atom(r - l, ">=", True)
            if op == ">":
                return F.atom(l - r, ">", True)
            if op == ">=":
                return F.atom(l - r, ">=", True)
        raise TypeError(f"not a boolean expression: {e}")


@dataclass(frozen=True)
class Frame:
    """Cost-only bound of an inner loop and what the loop may change."""

    cost: CostExpr
    writes: FrozenSet[str]
    quantum: bool


class FrameError(Exception):
    """The continuation of a summarised loop depends on state the loop changes."""


class OutOfTime(Exception):
    """The caller's deadline passed."""


def frame_of(loop: While, cost) -> Frame:
    quantum = any(isinstance(x, (Gate, Measure)) for x in walk(loop))
    return Frame(cost, frozenset(assigned_vars(loop)), quantum)


class Transformer:
    def __init__(self, prog: Program, domains: Optional[Mapping[str, SymState]] = None,
                 frames: Optional[Mapping[int, Frame]] = None, deadline: Optional[float] = None):
        self.prog = prog
        self.deadline = deadline
        self.n = prog.n_qubits
        self.conv = ExprConv(prog.decls)
        self.domains = dict(domains or {})
        self.frames = dict(frames or {})  # keyed by id() of the loop statement

    def state_for(self, loc: str) -> SymState:
        return self.domains.get(loc, SymState({}))

    def infer(self, s: Stmt, t: Term) -> Tuple[Term, List[SideCondition]]:
        scs: List[SideCondition] = []
        return self._go(s, t, scs), scs

    def _go(self, s: Stmt, t: Term, scs: List[SideCondition]) -> Term:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise OutOfTime()
        if isinstance(s, Skip):
            return t
        if isinstance(s, Seq):
            return self._go(s.first, self._go(s.second, t, scs), scs)
        if isinstance(s, Consume):
            return T.consume(self.conv.arith(s.expr), t)
        if isinstance(s, Assign):
            if self.prog.decls.get(s.var) == "bool":
                return T.subs(t, {s.var: self.conv.boolean(s.expr)}, {})
            return T.subs(t, {}, {s.var: self.conv.arith(s.expr)})
        if isinstance(s, Gate):
            targets = tuple(self.prog.qubit_index(q) for q in s.qubits)
            return T.subs(t, {}, density.gate_mapping(s.gate, targets, self.n))
        if isinstance(s, Measure):
            i = self.prog.qubit_index(s.qubit)
            p0, m0 = density.measure_mapping(i, 0, self.n)
            p1, m1 = density.measure_mapping(i, 1, self.n)
            return T.measure(p0, T.subs(t, {s.var: F.FALSE}, m0), p1, T.subs(t, {s.var: F.TRUE}, m1))
        if isinstance(s, If):
            b = self.conv.boolean(s.cond)
            return T.cond(b, self._go(s.then, t, scs), self._go(s.orelse, t, scs))
        if isinstance(s, While):
            fr = self.frames.get(id(s))
            if fr is not None:
                # frame rule: the loop cannot change the value of t
                classical, quantum = term_dependence(t, self.n)
                if classical & fr.writes or (quantum and fr.quantum):
                    raise FrameError(s.loc)
                return T.charge(fr.cost, t)
            b = self.conv.boolean(s.cond)
            head = TFun(s.loc, self.state_for(s.loc))
            body = self._go(s.body, head, scs)
            scs.append(SideCondition(b, head, body))
            scs.append(SideCondition(F.neg(b), head, t))
            return head
        raise TypeError(f"unexpected statement {s!r}")


def trace_multiple(p: RatFun, n: int) -> bool:
    """p is a positive constant, or a positive multiple of the trace of an n-qubit state."""
    if p.is_const():
        return p.const_value() > 0
    if p.den:
        return False
    vs = p.num.vars()
    if not vs or any((parse_density_var(v) or ("",))[0] != "d" for v in vs):
        return False
    coeffs = {c for _, c in p.num.terms.items()}
    if len(coeffs) != 1 or p.num.degree() != 1:
        return False
    return coeffs.pop() > 0 and vs == density.trace_poly(n).vars()


def _prob_vars(p: RatFun, n: int) -> frozenset:
    # states have unit trace, so a trace multiple does not depend on the state
    return frozenset() if trace_multiple(p, n) else p.vars()


def term_dependence(t: Term, n: int) -> Tuple[frozenset, bool]:
    """Classical variables a term reads, and whether it reads the quantum state."""
    vs = set()
    for x in T.walk(t):
        if isinstance(x, TFun):
            for _, v in x.state.items:
                vs |= F.fvars(v) if isinstance(v, Formula) else v.vars()
        elif isinstance(x, (T.TCost, T.TCharge)):
            for sm in x.cost.summands:
                vs |= _prob_vars(sm.prob, n) | sm.body.vars() | F.fvars(sm.guard)
        elif isinstance(x, T.TConsume):
            vs |= x.amount.vars()
        elif isinstance(x, T.TCond):
            vs |= F.fvars(x.cond)
        elif isinstance(x, T.TMeasure):
            vs |= _prob_vars(x.p0, n) | _prob_vars(x.p1, n)
    quantum = any(parse_density_var(v) for v in vs)
    return frozenset(v for v in vs if not parse_density_var(v)), quantum


def costfree(s: Stmt) -> Stmt:
    """The statement with every consume replaced by skip."""
    return map_stmt(s, lambda x: Skip() if isinstance(x, Consume) else x)


# tracked variables


def trace_reduced_vars(p: RatFun, n: int) -> frozenset:
    """Density variables a probability depends on once the trace is factored out."""
    diag = [((density.density_var("d", i), 1),) for i in range(1, (1 << n) + 1)]
    out = set()
    for part in [p.num] + [f for f, _ in p.den]:
        coeffs = {part.coeff(m) for m in diag}
        if len(coeffs) == 1:
            part = part - density.trace_poly(n).scale(coeffs.pop())
        out |= {v for v in part.vars() if parse_density_var(v)}
    return frozenset(out)


def measurement_probabilities(prog: Program, loop: While) -> List[RatFun]:
    """Outcome probabilities of the measurements in one pass of the loop body,
    expressed over the state at the loop head."""
    tr = Transformer(prog)
    with T.keep_measurements():
        term, _ = tr.infer(loop.body, TFun(loop.loc, SymState({})))
    out: List[RatFun] = []
    seen = set()
    for x in T.walk(term):
        if isinstance(x, T.TMeasure):
            for p in (x.p0, x.p1):
                if not p.is_const() and p not in seen:
                    seen.add(p)
                    out.append(p)
    return out


def classical_vars(prog: Program, kind: Optional[str] = None) -> List[str]:
    return [v for v, k in prog.decls.items() if k != "qubit" and (kind is None or k == kind)]


def make_state(prog: Program, names: Sequence[str]) -> SymState:
    bools = [v for v in names if prog.decls.get(v) == "bool"]
    ariths = [v for v in names if prog.decls.get(v) != "bool"]
    return SymState.identity(bools, ariths)


def guard_vars(loop: While) -> List[str]:
    return sorted(expr_vars(loop.cond))
