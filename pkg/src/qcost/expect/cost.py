"""Cost expressions: sums of prob * weight * [guard] * body.

``prob`` and ``body`` are rational functions over program and density
variables. ``weight`` is a polynomial over unknown coefficients (names that
start with ``_``); once a model is plugged in it is a constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from ..arith import Poly, QSqrt2, RatFun, is_unknown
from . import formula as F
from .formula import Formula


@dataclass(frozen=True)
class Summand:
    prob: RatFun
    weight: Poly
    guard: Formula
    body: RatFun

    def key(self):
        return (self.guard.key(), self.body.sort_key(), self.weight.sort_key(), self.prob.sort_key())


class CostExpr:
    __slots__ = ("summands", "_hash")

    def __init__(self, summands: Iterable[Summand] = ()):
        self.summands: Tuple[Summand, ...] = tuple(summands)
        self._hash = None

    @staticmethod
    def zero() -> "CostExpr":
        return CostExpr()

    @staticmethod
    def const(c) -> "CostExpr":
        c = QSqrt2.coerce(c)
        if not c:
            return CostExpr()
        return CostExpr([Summand(RatFun.const(c), Poly.const(1), F.TRUE, RatFun.const(1))])

    @staticmethod
    def norm(guard: Formula, body, weight: Optional[Poly] = None, prob=None) -> "CostExpr":
        return CostExpr([Summand(RatFun.coerce(1 if prob is None else prob),
                                 Poly.const(1) if weight is None else weight,
                                 guard, RatFun.coerce(body))]).simplify()

    def __add__(self, o: "CostExpr") -> "CostExpr":
        return CostExpr(self.summands + o.summands).simplify()

    def scale(self, p) -> "CostExpr":
        p = RatFun.coerce(p)
        return CostExpr(Summand(s.prob * p, s.weight, s.guard, s.body) for s in self.summands).simplify()

    def guarded(self, g: Formula) -> "CostExpr":
        return CostExpr(Summand(s.prob, s.weight, F.conj(g, s.guard), s.body)
                        for s in self.summands).simplify()

    def subs(self, bmap: Mapping[str, Formula], amap: Mapping[str, RatFun]) -> "CostExpr":
        out = []
        for s in self.summands:
            out.append(Summand(s.prob.subs(amap) if amap else s.prob, s.weight,
                               F.subs(s.guard, bmap, amap), s.body.subs(amap) if amap else s.body))
        return CostExpr(out).simplify()

    def instantiate(self, model: Mapping[str, QSqrt2]) -> "CostExpr":
        """Replace unknown coefficients by their values."""
        out = []
        for s in self.summands:
            w = s.weight.subs({v: Poly.const(model.get(v, 0)) for v in s.weight.vars()})
            out.append(Summand(s.prob, w, s.guard, s.body))
        return CostExpr(out).simplify()

    def unknowns(self) -> frozenset:
        out = frozenset()
        for s in self.summands:
            out |= s.weight.vars()
        return out

    def vars(self) -> frozenset:
        out = set()
        for s in self.summands:
            out |= s.prob.vars() | s.body.vars() | F.fvars(s.guard)
        return frozenset(out)

    def is_zero(self) -> bool:
        return not self.summands

    def is_closed(self) -> bool:
        return not self.unknowns()

    def constant_value(self) -> Optional[QSqrt2]:
        """The value when the expression is a constant, else None."""
        total = QSqrt2(0)
        for s in self.summands:
            if s.guard != F.TRUE or not s.prob.is_const() or not s.body.is_const() or not s.weight.is_const():
                return None
            total = total + s.prob.const_value() * s.weight.const_value() * s.body.const_value()
        return total

    def simplify(self) -> "CostExpr":
        merged: Dict[tuple, Summand] = {}
        order: List[tuple] = []
        for s in self.summands:
            s = _normalize(s)
            if s is None:
                continue
            k = (s.guard.key(), s.body.sort_key(), s.weight.sort_key())
            prev = merged.get(k)
            if prev is None:
                merged[k] = s
                order.append(k)
            else:
                p = prev.prob + s.prob
                if p.is_zero():
                    del merged[k]
                    order.remove(k)
                else:
                    merged[k] = Summand(p, s.weight, s.guard, s.body)
        # merge bodies under the same guard and weight when probabilities are 1
        bucket: Dict[tuple, Summand] = {}
        border: List[tuple] = []
        for k in order:
            s = merged[k]
            if s.prob == RatFun.const(1):
                bk = (s.guard.key(), s.weight.sort_key(), "b")
                prev = bucket.get(bk)
                if prev is not None:
                    body = prev.body + s.body
                    if body.is_zero():
                        del bucket[bk]
                        border.remove(bk)
                    else:
                        bucket[bk] = Summand(prev.prob, s.weight, s.guard, body)
                    continue
                bucket[bk] = s
                border.append(bk)
            else:
                bucket[k] = s
                border.append(k)
        out = [bucket[k] for k in border]
        out = [n for n in (_normalize(s) for s in out) if n is not None]
        out.sort(key=Summand.key)
        return CostExpr(out)

    # evaluation
    def evaluate(self, env: Mapping[str, object], model: Optional[Mapping[str, QSqrt2]] = None) -> float:
        total = 0.0
        for s in self.summands:
            p = s.prob.eval_float(env) if s.prob.vars() else float(s.prob.const_value())
            if p == 0.0:
                continue
            if not F.evaluate(s.guard, env):
                continue
            w = s.weight.eval_float({v: float(model[v]) for v in s.weight.vars()}) if s.weight.vars() else float(s.weight.const_value())
            total += p * w * s.body.eval_float(env)
        return total

    def evaluate_exact(self, env: Mapping[str, object], model=None) -> QSqrt2:
        total = QSqrt2(0)
        for s in self.summands:
            p = s.prob.eval(env)
            if not p:
                continue
            if not F.evaluate(s.guard, env, exact=True):
                continue
            w = s.weight.eval(model or {}) if s.weight.vars() else s.weight.const_value()
            total = total + p * w * s.body.eval(env)
        return total

    def __eq__(self, o):
        return isinstance(o, CostExpr) and self.summands == o.summands

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.summands)
        return self._hash

    def __str__(self):
        return cost_text(self)

    def __repr__(self):
        return f"CostExpr({self})"


def _normalize(s: Summand) -> Optional[Summand]:
    if s.guard == F.FALSE or s.prob.is_zero() or s.weight.is_zero() or s.body.is_zero():
        return None
    prob, weight, body, guard = s.prob, s.weight, s.body, s.guard
    if weight.is_const() and weight.const_value() != 1:
        prob = prob.scale(weight.const_value())
        weight = Poly.const(1)
    if body.is_const() and body.const_value() != 1:
        prob = prob.scale(body.const_value())
        body = RatFun.const(1)
    if prob.den or body.den:
        m = prob * body
        if len(m.den) < len(prob.den) + len(body.den) or not m.den:
            prob, body = RatFun.const(1), m
            if body.is_const():
                prob, body = RatFun.const(body.const_value()), RatFun.const(1)
    guard = _clear_guard(guard, prob)
    if guard == F.FALSE:
        return None
    if prob.is_zero() or body.is_zero():
        return None
    return Summand(prob, weight, guard, body)


def _clear_guard(g: Formula, prob: RatFun) -> Formula:
    """Drop guard denominators that vanish together with ``prob``.

    A denominator factor f of an atom is a non-negative probability. If f
    divides the numerator of ``prob`` then the summand is 0 whenever f = 0,
    and where f > 0 the atom's truth does not change when scaled by f.
    """
    if not any(isinstance(l, F.Atom) and l.expr.den for l in F.literals(g)):
        return g
    num = prob.num

    def clear(f: Formula) -> Formula:
        if isinstance(f, F.Atom) and f.expr.den:
            e = f.expr
            for fac, k in e.den:
                if num.divide_exact(fac) is None:
                    return f
            return F.atom(RatFun(e.num), f.rel, f.integral)
        if isinstance(f, F.And):
            return F.conj(*(clear(a) for a in f.args))
        if isinstance(f, F.Or):
            return F.disj(*(clear(a) for a in f.args))
        return f

    return clear(g)


def _factor_text(r: RatFun, force_paren: bool = False) -> str:
    t = str(r)
    simple = r.is_poly() and len(r.num.terms) == 1 and not t.startswith("-")
    return t if simple and not force_paren else f"({t})"


def summand_text(s: Summand) -> str:
    parts: List[str] = []
    coeff_only = s.prob.is_const()
    if not coeff_only:
        parts.append(_factor_text(s.prob))
    if not s.weight.is_const():
        parts.append(_factor_text(RatFun(s.weight)))
    if s.guard != F.TRUE:
        parts.append(f"[ {s.guard} ]")
    if not (s.body.is_const() and s.body.const_value() == 1):
        parts.append(_factor_text(s.body))
    if coeff_only:
        c = s.prob.const_value()
        if c != 1 or not parts:
            parts.insert(0, str(RatFun.const(c)))
    return " * ".join(parts)


def cost_text(c: CostExpr) -> str:
    if not c.summands:
        return "0"
    items = sorted(c.summands, key=lambda s: (s.guard == F.TRUE and s.body.is_const() and s.prob.is_const(), s.key()))
    return " + ".join(summand_text(s) for s in items)


def is_unknown_poly(p: Poly) -> bool:
    return all(is_unknown(v) for v in p.vars())
