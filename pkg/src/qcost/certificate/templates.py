"""Cost-expression templates for unknown loop expectations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..arith import Poly, QSqrt2, RatFun
from ..expect import formula as F
from ..expect.cost import CostExpr
from ..expect.formula import Formula

MAX_LEVEL = 3


@dataclass(frozen=True)
class Template:
    loc: str
    level: int
    cost: CostExpr
    unknowns: Tuple[str, ...]

    def instantiate(self, model: Mapping[str, QSqrt2]) -> CostExpr:
        return self.cost.instantiate(model)

    def __str__(self):
        return f"{self.loc} (level {self.level}): {self.cost}"


def coefficient_name(loc: str, k: int) -> str:
    return f"_c{loc}_{k}"


def guard_norms(guard: Formula) -> List[RatFun]:
    """Integer expressions e with an atom e >= 0 (or e > 0) in the guard."""
    out: List[RatFun] = []
    for lit in F.literals(guard):
        # integral strict atoms are already stored as e - 1 >= 0
        if isinstance(lit, F.Atom) and lit.integral and lit.rel == ">=" and not lit.expr.den:
            if lit.expr not in out:
                out.append(lit.expr)
    return out


def continuation_norms(cont: Optional[CostExpr]) -> List[Tuple[Formula, RatFun]]:
    """Norms of a closed continuation, as (guard, body) with polynomial bodies."""
    if cont is None:
        return []
    out: List[Tuple[Formula, RatFun]] = []
    for s in cont.summands:
        if s.weight.vars():
            continue
        body = s.prob * s.body
        if body.den:
            continue
        body = RatFun.const(1) if body.is_const() else RatFun(body.num.normalize_positive()[1])
        item = (s.guard, body)
        if item not in out:
            out.append(item)
    return out


def template_gen(loc: str, guard: Formula, matrix_vars: Sequence[str], level: int,
                 continuation: Optional[CostExpr] = None,
                 int_vars: Sequence[str] = ()) -> Template:
    """Template with fresh coefficients for the loop at ``loc``.

    Level 0 is a constant under the guard. Level 1 adds the positive and
    negative parts of each tracked matrix variable. Level 2 adds integer
    norms read off the guard (and of tracked integer variables). Level 3
    adds pairwise products of the level-2 bodies. Norms of the continuation
    are present at every level.
    """
    norms: List[Tuple[Formula, RatFun]] = [(guard, RatFun.const(1))]
    if level >= 1:
        for v in matrix_vars:
            x = RatFun.var(v)
            norms.append((F.conj(guard, F.atom(x, ">=")), x))
            norms.append((F.conj(guard, F.atom(-x, ">=")), -x))
    lin: List[RatFun] = []
    if level >= 2:
        lin = guard_norms(guard)
        for v in int_vars:
            x = RatFun.var(v)
            for e in (x, -x):
                if e not in lin:
                    lin.append(e)
        for e in lin:
            norms.append((F.conj(guard, F.atom(e, ">=", True)), e))
    if level >= 3:
        for i in range(len(lin)):
            for j in range(i, len(lin)):
                g = F.conj(guard, F.atom(lin[i], ">=", True), F.atom(lin[j], ">=", True))
                norms.append((g, lin[i] * lin[j]))
    for g, body in continuation_norms(continuation):
        norms.append((F.conj(g, F.atom(body, ">=")) if not body.is_const() else g, body))
    cost = CostExpr.zero()
    names: List[str] = []
    seen = set()
    for g, body in norms:
        if g == F.FALSE or (g, body) in seen:
            continue
        seen.add((g, body))
        name = coefficient_name(loc, len(names))
        names.append(name)
        cost = cost + CostExpr.norm(g, body, Poly.var(name))
    return Template(loc, level, cost, tuple(names))
