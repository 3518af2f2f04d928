"""Guard formulas over classical booleans and arithmetic atoms.

Formulas are kept in negation normal form. An atom says ``expr >= 0``,
``expr > 0`` or ``expr == 0`` for a rational function ``expr``. Atoms over
integer expressions are marked integral; their strict form is turned into
``expr - 1 >= 0``.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping, Optional, Tuple

from ..arith import Poly, QSqrt2, RatFun


class Formula:
    __slots__ = ("_key", "_hash")

    def key(self) -> str:
        k = getattr(self, "_key", None)
        if k is None:
            k = self._text()
            object.__setattr__(self, "_key", k)
        return k

    def __str__(self):
        return self.key()

    def __repr__(self):
        return f"<{type(self).__name__} {self.key()}>"

    def __eq__(self, o):
        return isinstance(o, Formula) and type(o) is type(self) and self.key() == o.key()

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self.key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __setattr__(self, k, v):
        raise AttributeError("formulas are immutable")

    def _init(self, **kw):
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_hash", None)
        for k, v in kw.items():
            object.__setattr__(self, k, v)

    # overridden below
    def _text(self) -> str:
        raise NotImplementedError


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self._init(value=bool(value))

    def _text(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


class BVar(Formula):
    __slots__ = ("name", "positive")

    def __init__(self, name: str, positive: bool = True):
        self._init(name=name, positive=positive)

    def _text(self):
        return self.name if self.positive else "!" + self.name


class Atom(Formula):
    __slots__ = ("expr", "rel", "integral")

    def __init__(self, expr: RatFun, rel: str, integral: bool = False):
        self._init(expr=expr, rel=rel, integral=integral)

    def _text(self):
        return f"{_expr_text(self.expr)} {self.rel} 0"


class And(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Tuple[Formula, ...]):
        self._init(args=args)

    def _text(self):
        return " && ".join(_paren(a) for a in self.args)


class Or(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Tuple[Formula, ...]):
        self._init(args=args)

    def _text(self):
        return " || ".join(_paren(a) for a in self.args)


def _paren(f: Formula) -> str:
    return f"({f.key()})" if isinstance(f, (And, Or)) else f.key()


def _expr_text(e: RatFun) -> str:
    return str(e)


# smart constructors


def atom(expr, rel: str, integral: bool = False) -> Formula:
    """Canonical atom ``expr rel 0``."""
    e = RatFun.coerce(expr)
    if rel not in (">=", ">", "=="):
        raise ValueError(rel)
    if integral and rel == ">":
        e, rel = e - RatFun.const(1), ">="
    if e.num.is_const():
        # denominators only hold probability factors; with a constant
        # numerator the sign is that of the numerator
        c = e.num.const_value()
        if rel == ">=":
            return Const(c >= 0)
        if rel == ">":
            return Const(c > 0)
        return Const(c == 0)
    c, p = e.num.normalize_positive()
    if integral:
        # keep integer coefficients: only divide by the content when exact
        c = QSqrt2(1)
        p = e.num
    e = RatFun(p, e.den, _canonical=True)
    if rel == "==":
        _, lc = p.leading()
        if lc < 0:
            e = -e
    return Atom(e, rel, integral)


def bvar(name: str) -> Formula:
    return BVar(name)


def neg(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, BVar):
        return BVar(f.name, not f.positive)
    if isinstance(f, Atom):
        if f.rel == ">=":
            return atom(-f.expr, ">", f.integral)
        if f.rel == ">":
            return atom(-f.expr, ">=", f.integral)
        return disj(atom(f.expr, ">", f.integral), atom(-f.expr, ">", f.integral))
    if isinstance(f, And):
        return disj(*(neg(a) for a in f.args))
    if isinstance(f, Or):
        return conj(*(neg(a) for a in f.args))
    raise TypeError(f)


def _flat(cls, fs: Iterable[Formula]):
    for f in fs:
        if isinstance(f, cls):
            yield from f.args
        else:
            yield f


def conj(*fs: Formula) -> Formula:
    seen: Dict[str, Formula] = {}
    for f in _flat(And, fs):
        if f is FALSE or (isinstance(f, Const) and not f.value):
            return FALSE
        if isinstance(f, Const):
            continue
        seen.setdefault(f.key(), f)
    for f in seen.values():
        if neg(f).key() in seen:
            return FALSE
    if not seen:
        return TRUE
    if len(seen) == 1:
        return next(iter(seen.values()))
    return And(tuple(seen[k] for k in sorted(seen)))


def disj(*fs: Formula) -> Formula:
    seen: Dict[str, Formula] = {}
    for f in _flat(Or, fs):
        if isinstance(f, Const):
            if f.value:
                return TRUE
            continue
        seen.setdefault(f.key(), f)
    for f in seen.values():
        if neg(f).key() in seen:
            return TRUE
    if not seen:
        return FALSE
    if len(seen) == 1:
        return next(iter(seen.values()))
    return Or(tuple(seen[k] for k in sorted(seen)))


def iff(a: Formula, b: Formula) -> Formula:
    return disj(conj(a, b), conj(neg(a), neg(b)))


# operations


def subs(f: Formula, bmap: Mapping[str, Formula], amap: Mapping[str, RatFun]) -> Formula:
    """Simultaneous substitution of booleans and arithmetic variables."""
    if isinstance(f, Const):
        return f
    if isinstance(f, BVar):
        if f.name in bmap:
            r = bmap[f.name]
            return r if f.positive else neg(r)
        return f
    if isinstance(f, Atom):
        if not amap or not (f.expr.vars() & amap.keys()):
            return f
        return atom(f.expr.subs(amap), f.rel, f.integral)
    args = [subs(a, bmap, amap) for a in f.args]
    return conj(*args) if isinstance(f, And) else disj(*args)


def fvars(f: Formula) -> frozenset:
    if isinstance(f, BVar):
        return frozenset([f.name])
    if isinstance(f, Atom):
        return f.expr.vars()
    if isinstance(f, (And, Or)):
        out = frozenset()
        for a in f.args:
            out |= fvars(a)
        return out
    return frozenset()


def literals(f: Formula):
    """Atoms and boolean literals of a formula, in order of first appearance."""
    if isinstance(f, (BVar, Atom)):
        yield f
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from literals(a)


def evaluate(f: Formula, env: Mapping[str, object], exact: bool = False) -> bool:
    """Truth value under a full valuation (bools for BVars, numbers otherwise)."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, BVar):
        v = bool(env[f.name])
        return v if f.positive else not v
    if isinstance(f, Atom):
        if exact:
            x = f.expr.eval(env)
            s = x.sign()
        else:
            x = f.expr.eval_float(env)
            s = (x > 0) - (x < 0)
        if f.rel == ">=":
            return s >= 0
        if f.rel == ">":
            return s > 0
        return s == 0
    if isinstance(f, And):
        return all(evaluate(a, env, exact) for a in f.args)
    return any(evaluate(a, env, exact) for a in f.args)


def evaluate_tol(f: Formula, env: Mapping[str, float], tol: float) -> Optional[bool]:
    """Float evaluation that returns None when an atom is within ``tol`` of 0."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, BVar):
        v = bool(env[f.name])
        return v if f.positive else not v
    if isinstance(f, Atom):
        x = f.expr.eval_float(env)
        if abs(x) <= tol:
            return None
        return x > 0 if f.rel != "==" else False
    vals = [evaluate_tol(a, env, tol) for a in f.args]
    if isinstance(f, And):
        if any(v is False for v in vals):
            return False
        return None if any(v is None for v in vals) else True
    if any(v is True for v in vals):
        return True
    return None if any(v is None for v in vals) else False


def decide(f: Formula, known: Mapping[str, bool]) -> Formula:
    """Partially evaluate under known literal values (keyed by literal text)."""
    if isinstance(f, Const):
        return f
    if isinstance(f, (BVar, Atom)):
        v = known.get(f.key())
        if v is None:
            nk = neg(f)
            if isinstance(nk, (BVar, Atom)):
                w = known.get(nk.key())
                if w is not None:
                    return Const(not w)
            return f
        return Const(v)
    args = [decide(a, known) for a in f.args]
    return conj(*args) if isinstance(f, And) else disj(*args)


def is_literal(f: Formula) -> bool:
    return isinstance(f, (BVar, Atom))


def atom_poly(f: Atom) -> Poly:
    return f.expr.num


def dnf(f: Formula, limit: int = 4096):
    """Disjunctive normal form as a list of literal tuples."""
    if isinstance(f, Const):
        return [()] if f.value else []
    if isinstance(f, (BVar, Atom)):
        return [(f,)]
    if isinstance(f, Or):
        out = []
        for a in f.args:
            out.extend(dnf(a, limit))
            if len(out) > limit:
                raise OverflowError("formula too large")
        return out
    out = [()]
    for a in f.args:
        da = dnf(a, limit)
        out = [x + y for x in out for y in da]
        if len(out) > limit:
            raise OverflowError("formula too large")
    return out
