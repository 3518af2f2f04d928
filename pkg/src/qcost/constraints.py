"""From loop side-conditions to polynomial implications.

Two stages. ``term_to_cost`` removes term constructors from the right-hand
side of a side-condition, splitting the context at conditionals and
measurements. ``cost_to_poly`` splits on norm guards, clears denominators
and attaches the facts every density matrix satisfies.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import density
from .arith import Poly, QSqrt2, RatFun, is_unknown, parse_density_var
from .expect import formula as F
from .expect import terms as T
from .expect.cost import CostExpr
from .expect.formula import Atom, BVar, Formula
from .transformer import OutOfTime, SideCondition, trace_multiple


@dataclass(frozen=True)
class CostConstraint:
    ctx: Formula
    lhs: CostExpr
    rhs: CostExpr
    origin: str = ""

    def __str__(self):
        return f"{self.ctx} |- {self.lhs} >= {self.rhs}"


@dataclass(frozen=True)
class PolyConstraint:
    """``/\\ nonstrict >= 0 /\\ strict > 0  ==>  goal >= 0`` (or ``> 0`` when ``strict_goal``)."""

    nonstrict: Tuple[Poly, ...]
    strict: Tuple[Poly, ...]
    goal: Poly
    strict_goal: bool = False
    origin: str = ""

    def premises(self) -> List[Tuple[Poly, bool]]:
        return [(p, False) for p in self.nonstrict] + [(p, True) for p in self.strict]

    def __str__(self):
        prem = [f"{p} >= 0" for p in self.nonstrict] + [f"{p} > 0" for p in self.strict]
        rel = ">" if self.strict_goal else ">="
        lhs = " /\\ ".join(prem) or "true"
        return f"{lhs} ==> {self.goal} {rel} 0"


# term -> cost


def instantiate(alpha: Mapping[str, CostExpr], f: T.TFun) -> CostExpr:
    b, a = f.state.split()
    return alpha[f.loc].subs(b, a)


_trace_multiple = trace_multiple


def is_one(p: RatFun, other: RatFun) -> Formula:
    """``p = 1`` for an outcome probability ``p`` whose complement is ``other``."""
    return F.conj(F.atom(p, ">"), F.atom(other, "=="))


def is_strict(p: RatFun, other: RatFun) -> Formula:
    """``0 < p < 1``."""
    return F.conj(F.atom(p, ">"), F.atom(other, ">"))


def rhs_cases(t: T.Term, alpha: Mapping[str, CostExpr], n: int) -> List[Tuple[Formula, CostExpr]]:
    """Context refinements paired with the cost expression valid under each."""
    if isinstance(t, T.TFun):
        return [(F.TRUE, instantiate(alpha, t))]
    if isinstance(t, T.TCost):
        return [(F.TRUE, t.cost)]
    if isinstance(t, T.TConsume):
        tick = T.close_consume(t.amount)
        return [(phi, tick + c) for phi, c in rhs_cases(t.rest, alpha, n)]
    if isinstance(t, T.TCharge):
        return [(phi, t.cost + c) for phi, c in rhs_cases(t.rest, alpha, n)]
    if isinstance(t, T.TCond):
        out = [(F.conj(t.cond, phi), c) for phi, c in rhs_cases(t.then, alpha, n)]
        nb = F.neg(t.cond)
        out += [(F.conj(nb, phi), c) for phi, c in rhs_cases(t.orelse, alpha, n)]
        return [(phi, c) for phi, c in out if phi != F.FALSE]
    if isinstance(t, T.TMeasure):
        c0, c1 = rhs_cases(t.t0, alpha, n), rhs_cases(t.t1, alpha, n)
        both = []
        for (f0, e0), (f1, e1) in product(c0, c1):
            phi = F.conj(f0, f1)
            if phi != F.FALSE:
                both.append((phi, e0.scale(t.p0) + e1.scale(t.p1)))
        if _trace_multiple(t.p0, n) and _trace_multiple(t.p1, n):
            return both
        out = [(F.conj(is_one(t.p0, t.p1), phi), c) for phi, c in c0]
        out += [(F.conj(is_one(t.p1, t.p0), phi), c) for phi, c in c1]
        strict = is_strict(t.p0, t.p1)
        out += [(F.conj(strict, phi), c) for phi, c in both]
        return [(phi, c) for phi, c in out if phi != F.FALSE]
    raise TypeError(t)


def term_to_cost(sc: SideCondition, alpha: Mapping[str, CostExpr], n: int,
                 origin: str = "") -> List[CostConstraint]:
    lhs = instantiate(alpha, sc.lhs)
    out: List[CostConstraint] = []
    seen = set()
    for phi, rhs in rhs_cases(sc.rhs, alpha, n):
        ctx = F.conj(sc.ctx, phi)
        # templates are non-negative, so a zero right-hand side holds trivially
        if ctx == F.FALSE or rhs.is_zero():
            continue
        key = (ctx, rhs)
        if key in seen:
            continue
        seen.add(key)
        out.append(CostConstraint(ctx, lhs, rhs, origin))
    return out


# cost -> poly


class Known:
    """Literal truth values collected along one branch."""

    __slots__ = ("values",)

    def __init__(self, values: Optional[Dict[str, Tuple[Formula, bool]]] = None):
        self.values: Dict[str, Tuple[Formula, bool]] = dict(values or {})

    def copy(self) -> "Known":
        return Known(self.values)

    def truth(self) -> Dict[str, bool]:
        return {k: v for k, (_, v) in self.values.items()}

    def _set(self, lit: Formula, val: bool) -> bool:
        prev = self.values.get(lit.key())
        if prev is not None:
            return prev[1] == val
        self.values[lit.key()] = (lit, val)
        return True

    def add(self, lit: Formula, val: bool) -> bool:
        """Record ``lit = val`` and its syntactic consequences; False on conflict."""
        if not self._set(lit, val):
            return False
        n = F.neg(lit)
        if F.is_literal(n):
            if not self._set(n, not val):
                return False
            if not val:
                return self.add(n, True)
        if isinstance(lit, Atom) and val:
            if lit.rel == ">":
                weak = F.atom(lit.expr, ">=", lit.integral)
                if F.is_literal(weak) and not self.add(weak, True):
                    return False
            elif lit.rel == "==":
                for e in (lit.expr, -lit.expr):
                    w = F.atom(e, ">=", lit.integral)
                    if F.is_literal(w) and not self.add(w, True):
                        return False
        return True

    def true_atoms(self) -> List[Atom]:
        return [l for l, v in self.values.values() if v and isinstance(l, Atom)]


def _positive_key(p: Poly):
    return p.normalize_positive()[1]


@dataclass
class PolyOptions:
    n_qubits: int
    density_level: int = 1
    prune: bool = True


@lru_cache(maxsize=None)
def density_context(n: int, level: int) -> Tuple[Tuple[Poly, bool], ...]:
    """Facts every n-qubit density matrix satisfies, as (poly, strict) premises."""
    if n == 0:
        return ()
    tr = density.trace_poly(n)
    out: List[Tuple[Poly, bool]] = [(tr - Poly.const(1), False), (Poly.const(1) - tr, False)]
    dim = 1 << n
    out += [(Poly.var(density.density_var("d", i)), False) for i in range(1, dim + 1)]
    if level >= 1:
        half = Poly.const(Fraction(1, 2))
        for kind in ("a", "b"):
            for i in range(1, dim + 1):
                for j in range(i + 1, dim + 1):
                    v = Poly.var(density.density_var(kind, i, j))
                    out += [(half - v, False), (half + v, False)]
    if level >= 2:
        for i in range(1, dim + 1):
            for j in range(i + 1, dim + 1):
                di, dj = Poly.var(density.density_var("d", i)), Poly.var(density.density_var("d", j))
                a = Poly.var(density.density_var("a", i, j))
                b = Poly.var(density.density_var("b", i, j))
                out.append((di * dj - a * a - b * b, False))
    return tuple(out)


def _program_vars(p: Poly) -> frozenset:
    return frozenset(v for v in p.vars() if not is_unknown(v))


def prune_premises(goal_vars: Iterable[str], premises: Sequence[Tuple[Poly, bool]]) -> List[Tuple[Poly, bool]]:
    """Keep premises connected to the goal through shared variables."""
    reach = set(goal_vars)
    pending = list(premises)
    kept: List[Tuple[Poly, bool]] = []
    changed = True
    while changed:
        changed = False
        rest = []
        for pr in pending:
            vs = _program_vars(pr[0])
            if vs & reach:
                kept.append(pr)
                reach |= vs
                changed = True
            else:
                rest.append(pr)
        pending = rest
    order = {id(p): i for i, p in enumerate(premises)}
    kept.sort(key=lambda pr: order[id(pr)])
    return kept


def _dedupe(premises: Iterable[Tuple[Poly, bool]]) -> List[Tuple[Poly, bool]]:
    seen: Dict[Poly, bool] = {}
    order: List[Poly] = []
    for p, strict in premises:
        if p.is_const():
            continue
        _, q = p.normalize_positive()
        if q in seen:
            seen[q] = seen[q] or strict
        else:
            seen[q] = strict
            order.append(q)
    return [(q, seen[q]) for q in order]


class _Branch:
    def __init__(self, opts: PolyOptions, origin: str):
        self.opts = opts
        self.origin = origin
        self.out: List[PolyConstraint] = []

    def leaf(self, known: Known, lhs: CostExpr, rhs: CostExpr):
        truth = known.truth()
        goal = RatFun.const(0)
        for sign, c in ((1, lhs), (-1, rhs)):
            for s in c.summands:
                g = F.decide(s.guard, truth)
                if g == F.FALSE:
                    continue
                assert g == F.TRUE, "undecided guard at leaf"
                term = s.prob * RatFun(s.weight) * s.body
                goal = goal + term if sign > 0 else goal - term
        if goal.is_zero():
            return
        premises: List[Tuple[Poly, bool]] = []
        need_positive: List[Poly] = [f for f, _ in goal.den]
        for a in known.true_atoms():
            for f, _ in a.expr.den:
                need_positive.append(f)
            num = a.expr.num
            if a.rel == ">=":
                premises.append((num, False))
            elif a.rel == ">":
                premises.append((num, True))
        premises = _dedupe(premises)
        strict_keys = {q for q, s in premises if s}
        premises_all = premises + list(density_context(self.opts.n_qubits, self.opts.density_level))
        goal_poly = goal.num
        seed = frozenset().union(*(_program_vars(p) for p, _ in premises))
        if not (goal_poly.is_const() and goal_poly.const_value() >= 0):
            self._emit(premises_all, goal_poly, False, seed)
        done = set()
        for f in need_positive:
            k = _positive_key(f)
            if k in done or k in strict_keys or _trace_multiple(RatFun(f), self.opts.n_qubits):
                continue
            done.add(k)
            self._emit(premises_all, f, True, seed)

    def _emit(self, premises, goal: Poly, strict_goal: bool, seed: frozenset):
        ps = _dedupe(premises)
        if self.opts.prune:
            # a constant goal can only follow from infeasible premises, so it
            # starts from the branch's own facts
            ps = prune_premises(_program_vars(goal) or seed, ps)
        self.out.append(PolyConstraint(tuple(p for p, s in ps if not s), tuple(p for p, s in ps if s),
                                       goal, strict_goal, self.origin))

    def split(self, known: Known, lhs: CostExpr, rhs: CostExpr):
        truth = known.truth()
        for c in (lhs, rhs):
            for s in c.summands:
                g = F.decide(s.guard, truth)
                if isinstance(g, F.Const):
                    continue
                lit = next(iter(F.literals(g)))
                for val in (True, False):
                    k2 = known.copy()
                    if k2.add(lit, val):
                        self.split(k2, lhs, rhs)
                return
        self.leaf(known, lhs, rhs)


def cost_to_poly(cc: CostConstraint, opts: PolyOptions) -> List[PolyConstraint]:
    br = _Branch(opts, cc.origin)
    for conj in F.dnf(cc.ctx):
        known = Known()
        if all(known.add(l, True) for l in conj):
            br.split(known, cc.lhs, cc.rhs)
    return br.out


def reduce_side_conditions(scs: Sequence[SideCondition], alpha: Mapping[str, CostExpr],
                           opts: PolyOptions, deadline: Optional[float] = None,
                           ) -> Tuple[List[CostConstraint], List[PolyConstraint]]:
    costs: List[CostConstraint] = []
    polys: List[PolyConstraint] = []
    for i, sc in enumerate(scs):
        origin = f"{sc.lhs.loc}#{i}"
        cs = term_to_cost(sc, alpha, opts.n_qubits, origin)
        costs += cs
        for cc in cs:
            if deadline is not None and time.monotonic() > deadline:
                raise OutOfTime()
            polys += cost_to_poly(cc, opts)
    return costs, _dedupe_constraints(polys)


def _dedupe_constraints(pcs: List[PolyConstraint]) -> List[PolyConstraint]:
    seen = set()
    out = []
    for pc in pcs:
        key = (pc.nonstrict, pc.strict, pc.goal, pc.strict_goal)
        if key in seen:
            continue
        seen.add(key)
        out.append(pc)
    return out
