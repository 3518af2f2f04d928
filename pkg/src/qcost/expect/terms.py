"""Expectation terms produced by the backward transformer."""

from __future__ import annotations

from contextlib import contextmanager
from typing import Dict, Iterator, List, Mapping, Tuple, Union

from ..arith import RatFun
from . import formula as F
from .cost import CostExpr
from .formula import Formula

Value = Union[Formula, RatFun]


class SymState:
    """Finite map from tracked variables to symbolic values."""

    __slots__ = ("items", "_hash")

    def __init__(self, items: Mapping[str, Value]):
        self.items: Tuple[Tuple[str, Value], ...] = tuple(sorted(items.items()))
        self._hash = None

    @staticmethod
    def identity(bools, ariths) -> "SymState":
        d: Dict[str, Value] = {b: F.bvar(b) for b in bools}
        d.update({a: RatFun.var(a) for a in ariths})
        return SymState(d)

    def as_dict(self) -> Dict[str, Value]:
        return dict(self.items)

    def domain(self) -> List[str]:
        return [k for k, _ in self.items]

    def subs(self, bmap, amap) -> "SymState":
        out = {}
        for k, v in self.items:
            if isinstance(v, Formula):
                out[k] = F.subs(v, bmap, amap)
            else:
                out[k] = v.subs(amap) if amap else v
        return SymState(out)

    def split(self):
        """(boolean map, arithmetic map) for use as a substitution."""
        b = {k: v for k, v in self.items if isinstance(v, Formula)}
        a = {k: v for k, v in self.items if not isinstance(v, Formula)}
        return b, a

    def __eq__(self, o):
        if not isinstance(o, SymState) or len(o.items) != len(self.items):
            return False
        for (k1, v1), (k2, v2) in zip(self.items, o.items):
            if k1 != k2 or type(v1) is not type(v2) or v1 != v2:
                return False
        return True

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple((k, v.key() if isinstance(v, Formula) else v) for k, v in self.items))
        return self._hash

    def __str__(self):
        return "{" + ", ".join(f"{k} -> {v}" for k, v in self.items) + "}"


class Term:
    __slots__ = ("_hash",)

    def __eq__(self, o):
        return type(o) is type(self) and self._fields() == o._fields()

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self._fields()))
            object.__setattr__(self, "_hash", h)
        return h

    def _fields(self):
        raise NotImplementedError

    def __repr__(self):
        return term_text(self)


class TFun(Term):
    __slots__ = ("loc", "state")

    def __init__(self, loc: str, state: SymState):
        self.loc, self.state = loc, state

    def _fields(self):
        return (self.loc, self.state)


class TCost(Term):
    __slots__ = ("cost",)

    def __init__(self, cost: CostExpr):
        self.cost = cost

    def _fields(self):
        return (self.cost,)


class TConsume(Term):
    __slots__ = ("amount", "rest")

    def __init__(self, amount: RatFun, rest: Term):
        self.amount, self.rest = amount, rest

    def _fields(self):
        return (self.amount, self.rest)


class TCharge(Term):
    """Pay a closed cost, then continue; stands in for a summarised inner loop."""

    __slots__ = ("cost", "rest")

    def __init__(self, cost: CostExpr, rest: Term):
        self.cost, self.rest = cost, rest

    def _fields(self):
        return (self.cost, self.rest)


class TCond(Term):
    __slots__ = ("cond", "then", "orelse")

    def __init__(self, cond: Formula, then: Term, orelse: Term):
        self.cond, self.then, self.orelse = cond, then, orelse

    def _fields(self):
        return (self.cond, self.then, self.orelse)


class TMeasure(Term):
    __slots__ = ("p0", "t0", "p1", "t1")

    def __init__(self, p0: RatFun, t0: Term, p1: RatFun, t1: Term):
        self.p0, self.t0, self.p1, self.t1 = p0, t0, p1, t1

    def _fields(self):
        return (self.p0, self.t0, self.p1, self.t1)


ZERO = TCost(CostExpr.zero())

# MeasEq is switched off while probing for measurement probabilities
_MEAS_EQ = [True]


@contextmanager
def keep_measurements():
    _MEAS_EQ.append(False)
    try:
        yield
    finally:
        _MEAS_EQ.pop()

# smart constructors applying the eager simplifications


def cond(b: Formula, t1: Term, t2: Term) -> Term:
    if b == F.TRUE:
        return t1
    if b == F.FALSE:
        return t2
    if t1 == t2:
        return t1
    return TCond(b, t1, t2)


def measure(p0: RatFun, t0: Term, p1: RatFun, t1: Term) -> Term:
    if _MEAS_EQ[-1] and t0 == t1:
        return t0
    if p0.is_zero():
        return t1
    if p1.is_zero():
        return t0
    return TMeasure(p0, t0, p1, t1)


def consume(e: RatFun, t: Term) -> Term:
    if e.is_const() and e.const_value() <= 0:
        return t
    if e.is_const() and isinstance(t, TCost):
        return TCost(t.cost + CostExpr.const(e.const_value()))
    return TConsume(e, t)


def charge(c: CostExpr, t: Term) -> Term:
    if c.is_zero():
        return t
    if isinstance(t, TCost):
        return TCost(c + t.cost)
    return TCharge(c, t)


def subs(t: Term, bmap, amap) -> Term:
    """Simultaneous substitution throughout a term, re-simplifying."""
    memo: Dict[int, Term] = {}

    def go(x: Term) -> Term:
        r = memo.get(id(x))
        if r is not None:
            return r
        if isinstance(x, TFun):
            r = TFun(x.loc, x.state.subs(bmap, amap))
        elif isinstance(x, TCost):
            r = TCost(x.cost.subs(bmap, amap))
        elif isinstance(x, TConsume):
            r = consume(x.amount.subs(amap) if amap else x.amount, go(x.rest))
        elif isinstance(x, TCharge):
            r = charge(x.cost.subs(bmap, amap), go(x.rest))
        elif isinstance(x, TCond):
            r = cond(F.subs(x.cond, bmap, amap), go(x.then), go(x.orelse))
        elif isinstance(x, TMeasure):
            s = (lambda p: p.subs(amap)) if amap else (lambda p: p)
            r = measure(s(x.p0), go(x.t0), s(x.p1), go(x.t1))
        else:
            raise TypeError(x)
        memo[id(x)] = r
        return r

    return go(t)


def walk(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, (TConsume, TCharge)):
        yield from walk(t.rest)
    elif isinstance(t, TCond):
        yield from walk(t.then)
        yield from walk(t.orelse)
    elif isinstance(t, TMeasure):
        yield from walk(t.t0)
        yield from walk(t.t1)


def funs(t: Term) -> List[TFun]:
    return [x for x in walk(t) if isinstance(x, TFun)]


def is_closed(t: Term) -> bool:
    return not funs(t)


def close(t: Term) -> CostExpr:
    """Fold a term without function symbols into a single cost expression."""
    if isinstance(t, TCost):
        return t.cost
    if isinstance(t, TConsume):
        return close_consume(t.amount) + close(t.rest)
    if isinstance(t, TCharge):
        return t.cost + close(t.rest)
    if isinstance(t, TCond):
        return close(t.then).guarded(t.cond) + close(t.orelse).guarded(F.neg(t.cond))
    if isinstance(t, TMeasure):
        return close(t.t0).scale(t.p0) + close(t.t1).scale(t.p1)
    raise ValueError(f"term still mentions {t!r}")


def close_consume(e: RatFun) -> CostExpr:
    """[e >= 0] * e, the cost of consume(e)."""
    if e.is_const():
        return CostExpr.const(max(e.const_value(), 0 * e.const_value()))
    integral = all(not v.startswith("_") for v in e.vars())
    return CostExpr.norm(F.atom(e, ">=", integral), e)


def term_text(t: Term, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(t, TFun):
        return f"{pad}{t.loc}{t.state}"
    if isinstance(t, TCost):
        return f"{pad}cost({t.cost})"
    if isinstance(t, TConsume):
        return f"{pad}consume({t.amount})\n{term_text(t.rest, indent)}"
    if isinstance(t, TCharge):
        return f"{pad}charge({t.cost})\n{term_text(t.rest, indent)}"
    if isinstance(t, TCond):
        return (f"{pad}if {t.cond}\n{term_text(t.then, indent + 1)}\n{pad}else\n"
                f"{term_text(t.orelse, indent + 1)}")
    if isinstance(t, TMeasure):
        return (f"{pad}meas\n{pad}  with {t.p0}:\n{term_text(t.t0, indent + 2)}\n"
                f"{pad}  with {t.p1}:\n{term_text(t.t1, indent + 2)}")
    return f"{pad}{t!r}"
