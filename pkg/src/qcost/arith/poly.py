"""Sparse multivariate polynomials with coefficients in Q(sqrt 2).

Variables are plain strings. Their global order is fixed by ``var_rank``:
classical integers first (by name), then the density variables d_i, a_ij,
b_ij by index, then internal unknowns (names starting with ``_``).
Monomials are tuples of ``(var, exp)`` pairs sorted by that rank and are
compared in graded-lex order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple

from .qsqrt2 import QSqrt2, render

Monomial = Tuple[Tuple[str, int], ...]

_DENS = re.compile(r"^(?:d(\d+)|([ab])(\d)(\d)|([ab])(\d+)_(\d+))$")


def density_var(kind: str, i: int, j: int = 0) -> str:
    """Name of a density variable; indices are 1-based."""
    if kind == "d":
        return f"d{i}"
    if i < 10 and j < 10:
        return f"{kind}{i}{j}"
    return f"{kind}{i}_{j}"


@lru_cache(maxsize=None)
def parse_density_var(name: str) -> Optional[Tuple[str, int, int]]:
    m = _DENS.match(name)
    if not m:
        return None
    if m.group(1):
        return ("d", int(m.group(1)), int(m.group(1)))
    if m.group(2):
        return (m.group(2), int(m.group(3)), int(m.group(4)))
    return (m.group(5), int(m.group(6)), int(m.group(7)))


def is_density_var(name: str) -> bool:
    return parse_density_var(name) is not None


def is_unknown(name: str) -> bool:
    return name.startswith("_")


@lru_cache(maxsize=None)
def var_rank(name: str) -> tuple:
    if is_unknown(name):
        return (4, 0, 0, name)
    dv = parse_density_var(name)
    if dv is None:
        return (0, 0, 0, name)
    kind, i, j = dv
    return ({"d": 1, "a": 2, "b": 3}[kind], i, j, "")


class _Desc:
    """Wraps a rank so that smaller ranks compare as larger."""

    __slots__ = ("r",)

    def __init__(self, r):
        self.r = r

    def __lt__(self, o):
        return self.r > o.r

    def __eq__(self, o):
        return self.r == o.r


@lru_cache(maxsize=200000)
def mono_key(m: Monomial):
    """Sort key realising graded-lex order (larger key = larger monomial)."""
    return (sum(e for _, e in m), tuple((_Desc(var_rank(v)), e) for v, e in m))


def mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda ve: var_rank(ve[0])))


def mono_div(m1: Monomial, m2: Monomial) -> Optional[Monomial]:
    """m1 / m2 if m2 divides m1."""
    d = dict(m1)
    for v, e in m2:
        have = d.get(v, 0)
        if have < e:
            return None
        if have == e:
            del d[v]
        else:
            d[v] = have - e
    return tuple(sorted(d.items(), key=lambda ve: var_rank(ve[0])))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_text(m: Monomial) -> str:
    parts = []
    for v, e in m:
        parts.append(v if e == 1 else f"{v}^{e}")
    return "*".join(parts)


_ZERO = QSqrt2(0)


class Poly:
    __slots__ = ("terms", "_hash", "_normal")

    def __init__(self, terms: Optional[Mapping[Monomial, QSqrt2]] = None, _trusted: bool = False):
        if terms is None:
            self.terms: Dict[Monomial, QSqrt2] = {}
        elif _trusted:
            self.terms = dict(terms)
        else:
            self.terms = {m: QSqrt2.coerce(c) for m, c in terms.items() if c}
        self._hash = None
        self._normal = None

    # constructors
    @staticmethod
    def const(c) -> "Poly":
        c = QSqrt2.coerce(c)
        return Poly({(): c}, _trusted=True) if c else Poly()

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly({((name, 1),): QSqrt2(1)}, _trusted=True)

    @staticmethod
    def coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        return Poly.const(x)

    # arithmetic
    def __add__(self, o):
        if not isinstance(o, Poly):
            o = Poly.const(o)
        if not o.terms:
            return self
        if not self.terms:
            return o
        out = dict(self.terms)
        for m, c in o.terms.items():
            s = out.get(m)
            s = c if s is None else s + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, o):
        return self + (-Poly.coerce(o))

    def __rsub__(self, o):
        return Poly.coerce(o) - self

    def scale(self, c) -> "Poly":
        c = QSqrt2.coerce(c)
        if not c:
            return Poly()
        if c == 1:
            return self
        return Poly({m: k * c for m, k in self.terms.items()}, _trusted=True)

    def __mul__(self, o):
        if not isinstance(o, Poly):
            return self.scale(o)
        if not self.terms or not o.terms:
            return Poly()
        if len(o.terms) == 1 and () in o.terms:
            return self.scale(o.terms[()])
        if len(self.terms) == 1 and () in self.terms:
            return o.scale(self.terms[()])
        out: Dict[Monomial, QSqrt2] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m)
                p = c1 * c2
                s = p if s is None else s + p
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly(out, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out, base = Poly.const(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # inspection
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> QSqrt2:
        """Constant term (the value if the polynomial is constant)."""
        return self.terms.get((), _ZERO)

    def vars(self) -> frozenset:
        return frozenset(v for m in self.terms for v, _ in m)

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def degree_in(self, pred: Callable[[str], bool]) -> int:
        return max((sum(e for v, e in m if pred(v)) for m in self.terms), default=0)

    def coeff(self, m: Monomial) -> QSqrt2:
        return self.terms.get(m, _ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mono_key(mc[0]), reverse=True)

    def leading(self) -> Tuple[Monomial, QSqrt2]:
        m = max(self.terms, key=mono_key)
        return m, self.terms[m]

    def has_irrational(self) -> bool:
        return any(c.b != 0 for c in self.terms.values())

    # transformations
    def subs(self, mapping: Mapping[str, "Poly"]) -> "Poly":
        if not mapping or not (self.vars() & mapping.keys()):
            return self
        out = Poly()
        cache: Dict[Tuple[str, int], Poly] = {}
        for m, c in self.terms.items():
            t = Poly.const(c)
            rest = []
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    pw = cache.get(key)
                    if pw is None:
                        pw = cache[key] = mapping[v] ** e
                    t = t * pw
                else:
                    rest.append((v, e))
            if rest:
                t = t * Poly({tuple(rest): QSqrt2(1)}, _trusted=True)
            out = out + t
        return out

    def rename(self, f: Callable[[str], str]) -> "Poly":
        out: Dict[Monomial, QSqrt2] = {}
        for m, c in self.terms.items():
            d: Dict[str, int] = {}
            for v, e in m:
                nv = f(v)
                d[nv] = d.get(nv, 0) + e
            nm = tuple(sorted(d.items(), key=lambda ve: var_rank(ve[0])))
            s = out.get(nm)
            out[nm] = c if s is None else s + c
        return Poly({m: c for m, c in out.items() if c}, _trusted=True)

    def eval(self, env: Mapping[str, object]) -> QSqrt2:
        """Exact evaluation; env values must be int, Fraction or QSqrt2."""
        total = QSqrt2(0)
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t = t * (QSqrt2.coerce(env[v]) ** e)
            total = total + t
        return total

    def eval_float(self, env: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self.terms.items():
            t = float(c)
            for v, e in m:
                t *= env[v] ** e
            total += t
        return total

    def partial_eval(self, env: Mapping[str, object]) -> "Poly":
        return self.subs({v: Poly.const(x) for v, x in env.items()})

    def split(self, keep: Callable[[str], bool]) -> Dict[Monomial, "Poly"]:
        """Group by the sub-monomial over variables satisfying ``keep``.

        Returns {monomial over kept vars: polynomial over the others}.
        """
        out: Dict[Monomial, Poly] = {}
        for m, c in self.terms.items():
            km = tuple((v, e) for v, e in m if keep(v))
            om = tuple((v, e) for v, e in m if not keep(v))
            p = out.get(km)
            t = Poly({om: c}, _trusted=True)
            out[km] = t if p is None else p + t
        return {k: p for k, p in out.items() if not p.is_zero()}

    def normalize_positive(self) -> Tuple[QSqrt2, "Poly"]:
        """(c, p) with c > 0, self = c * p and the leading coefficient of p = +-1."""
        if self._normal is None:
            if not self.terms:
                self._normal = (QSqrt2(1), self)
            else:
                _, lc = self.leading()
                c = lc if lc > 0 else -lc
                self._normal = (c, self.scale(c.inverse()))
        return self._normal

    def divide_exact(self, other: "Poly") -> Optional["Poly"]:
        """Quotient q with self = q * other, or None if other does not divide.

        A single polynomial is a Groebner basis of the ideal it generates, so
        the division remainder vanishes exactly when ``other`` divides.
        """
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return Poly()
        if other.is_const():
            return self.scale(other.const_value().inverse())
        lm, lc = other.leading()
        inv = lc.inverse()
        if not (self.vars() >= other.vars()):
            return None
        rem = self
        quot: Dict[Monomial, QSqrt2] = {}
        steps = 0
        while not rem.is_zero():
            m, c = rem.leading()
            qm = mono_div(m, lm)
            if qm is None:
                return None
            qc = c * inv
            quot[qm] = quot.get(qm, _ZERO) + qc
            rem = rem - Poly({qm: qc}, _trusted=True) * other
            steps += 1
            if steps > 100000:
                return None
        return Poly({m: c for m, c in quot.items() if c}, _trusted=True)

    # comparisons
    def __eq__(self, o):
        if not isinstance(o, Poly):
            try:
                o = Poly.coerce(o)
            except TypeError:
                return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def sort_key(self):
        return tuple((mono_text(m), c.a, c.b) for m, c in self.sorted_terms())

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return poly_text(self)


def poly_text(p: Poly) -> str:
    if p.is_zero():
        return "0"
    out = []
    for k, (m, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        mag = -c if neg else c
        if m:
            body = mono_text(m)
            if mag != 1:
                body = f"{render(mag)}*{body}"
        else:
            body = render(mag)
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def linear_combination(items: Iterable[Tuple[object, Poly]]) -> Poly:
    out = Poly()
    for c, p in items:
        out = out + p.scale(c)
    return out


def frac(x) -> Fraction:
    return Fraction(x)
