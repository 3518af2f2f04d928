"""Rational functions kept as numerator over a multiset of denominator factors.

Factors are polynomials scaled so that their leading coefficient is +-1; the
scale goes into the numerator. The sign of a factor is never flipped, so a
factor that came from a probability stays non-negative on physical states.
Cancellation is by exact division of the numerator by each factor; no GCD is
ever computed.
"""

from __future__ import annotations

from typing import Dict, Mapping, Tuple

from .poly import Poly
from .qsqrt2 import QSqrt2

Den = Tuple[Tuple[Poly, int], ...]


def _canon_den(d: Dict[Poly, int]) -> Den:
    return tuple(sorted(((f, k) for f, k in d.items() if k > 0), key=lambda fk: fk[0].sort_key()))


class RatFun:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Den = (), _canonical: bool = False):
        self._hash = None
        if _canonical:
            self.num, self.den = num, den
            return
        num, den = _normalize(num, den)
        self.num, self.den = num, den

    @staticmethod
    def const(c) -> "RatFun":
        return RatFun(Poly.const(c), (), _canonical=True)

    @staticmethod
    def var(name: str) -> "RatFun":
        return RatFun(Poly.var(name), (), _canonical=True)

    @staticmethod
    def coerce(x) -> "RatFun":
        if isinstance(x, RatFun):
            return x
        if isinstance(x, Poly):
            return RatFun(x, (), _canonical=True)
        return RatFun.const(x)

    # inspection
    def is_poly(self) -> bool:
        return not self.den

    def to_poly(self) -> Poly:
        if self.den:
            raise ValueError(f"not a polynomial: {self}")
        return self.num

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return not self.den and self.num.is_const()

    def const_value(self) -> QSqrt2:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.const_value()

    def vars(self) -> frozenset:
        out = set(self.num.vars())
        for f, _ in self.den:
            out |= f.vars()
        return frozenset(out)

    def den_poly(self) -> Poly:
        out = Poly.const(1)
        for f, k in self.den:
            out = out * (f ** k)
        return out

    def factors(self):
        return [f for f, _ in self.den]

    # arithmetic
    def __add__(self, o):
        o = RatFun.coerce(o)
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        a, b = dict(self.den), dict(o.den)
        lcm = dict(a)
        for f, k in b.items():
            lcm[f] = max(lcm.get(f, 0), k)
        na = self.num
        for f, k in lcm.items():
            if k - a.get(f, 0):
                na = na * (f ** (k - a.get(f, 0)))
        nb = o.num
        for f, k in lcm.items():
            if k - b.get(f, 0):
                nb = nb * (f ** (k - b.get(f, 0)))
        return RatFun(na + nb, _canon_den(lcm))

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _canonical=True)

    def __sub__(self, o):
        return self + (-RatFun.coerce(o))

    def __rsub__(self, o):
        return RatFun.coerce(o) - self

    def scale(self, c) -> "RatFun":
        c = QSqrt2.coerce(c)
        if not c:
            return RatFun(Poly(), (), _canonical=True)
        return RatFun(self.num.scale(c), self.den, _canonical=True)

    def __mul__(self, o):
        if isinstance(o, (int, QSqrt2)) or type(o).__name__ == "Fraction":
            return self.scale(o)
        o = RatFun.coerce(o)
        if self.num.is_zero() or o.num.is_zero():
            return RatFun(Poly(), (), _canonical=True)
        d = dict(self.den)
        for f, k in o.den:
            d[f] = d.get(f, 0) + k
        return RatFun(self.num * o.num, _canon_den(d))

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den_poly(), ((self.num, 1),))

    def __truediv__(self, o):
        if isinstance(o, (int, QSqrt2)) or type(o).__name__ == "Fraction":
            return self.scale(QSqrt2.coerce(o).inverse())
        return self * RatFun.coerce(o).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = RatFun.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def subs(self, mapping: Mapping[str, "RatFun"]) -> "RatFun":
        if not mapping:
            return self
        vs = self.vars()
        if not any(v in mapping for v in vs):
            return self
        out = subs_poly(self.num, mapping)
        for f, k in self.den:
            out = out / (subs_poly(f, mapping) ** k)
        return out

    def eval(self, env) -> QSqrt2:
        v = self.num.eval(env)
        for f, k in self.den:
            v = v / (f.eval(env) ** k)
        return v

    def eval_float(self, env) -> float:
        v = self.num.eval_float(env)
        for f, k in self.den:
            v /= f.eval_float(env) ** k
        return v

    def __eq__(self, o):
        if not isinstance(o, RatFun):
            try:
                o = RatFun.coerce(o)
            except TypeError:
                return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def sort_key(self):
        return (self.num.sort_key(), tuple((f.sort_key(), k) for f, k in self.den))

    def __repr__(self):
        return f"RatFun({self})"

    def __str__(self):
        if not self.den:
            return str(self.num)
        ds = []
        for f, k in self.den:
            t = f"({f})" if len(f.terms) > 1 else str(f)
            ds.append(t if k == 1 else f"{t}^{k}")
        return f"({self.num}) / ({' * '.join(ds)})"


def subs_poly(p: Poly, mapping: Mapping[str, RatFun]) -> RatFun:
    """Substitute rational functions for variables of a polynomial."""
    if not (p.vars() & mapping.keys()):
        return RatFun(p, (), _canonical=True)
    if all(mapping[v].is_poly() for v in p.vars() if v in mapping):
        return RatFun(p.subs({v: mapping[v].num for v in p.vars() if v in mapping}), (), _canonical=True)
    # group monomials by their common denominator to limit blow-up
    acc: Dict[Tuple, Tuple[Poly, Den]] = {}
    powcache: Dict[Tuple[str, int], RatFun] = {}
    for m, c in p.terms.items():
        t = RatFun.const(c)
        rest = []
        for v, e in m:
            if v in mapping:
                key = (v, e)
                pw = powcache.get(key)
                if pw is None:
                    pw = powcache[key] = mapping[v] ** e
                t = RatFun(t.num * pw.num, _merge(t.den, pw.den), _canonical=True)
            else:
                rest.append((v, e))
        if rest:
            t = RatFun(t.num * Poly({tuple(rest): QSqrt2(1)}), t.den, _canonical=True)
        prev = acc.get(t.den)
        acc[t.den] = (t.num if prev is None else prev[0] + t.num, t.den)
    out = RatFun.const(0)
    for num, den in acc.values():
        out = out + RatFun(num, den)
    return out


def _merge(a: Den, b: Den) -> Den:
    if not b:
        return a
    if not a:
        return b
    d = dict(a)
    for f, k in b:
        d[f] = d.get(f, 0) + k
    return _canon_den(d)


def _normalize(num: Poly, den) -> Tuple[Poly, Den]:
    if num.is_zero():
        return Poly(), ()
    d: Dict[Poly, int] = {}
    scale = QSqrt2(1)
    for f, k in den:
        if k == 0:
            continue
        if f.is_zero():
            raise ZeroDivisionError("zero denominator factor")
        if f.is_const():
            scale = scale * (f.const_value() ** k)
            continue
        c, g = f.normalize_positive()
        if c != 1:
            scale = scale * (c ** k)
        d[g] = d.get(g, 0) + k
    if scale != 1:
        num = num.scale(scale.inverse())
    # cancel factors that divide the numerator exactly
    for g in sorted(d, key=lambda p: p.sort_key()):
        while d[g] > 0:
            q = num.divide_exact(g)
            if q is None:
                break
            num = q
            d[g] -= 1
    return num, _canon_den(d)
