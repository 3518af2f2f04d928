"""Exact numbers in Q(sqrt 2) and their complex closure Q(sqrt 2, i)."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


@total_ordering
class QSqrt2:
    """a + b*sqrt(2) with a, b rational. Immutable and hashable."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        object.__setattr__(self, "a", _frac(a))
        object.__setattr__(self, "b", _frac(b))

    def __setattr__(self, name, value):
        raise AttributeError("QSqrt2 is immutable")

    @staticmethod
    def coerce(x) -> "QSqrt2":
        if isinstance(x, QSqrt2):
            return x
        return QSqrt2(x)

    @staticmethod
    def sqrt2() -> "QSqrt2":
        return QSqrt2(0, 1)

    # ring operations
    def __add__(self, o):
        try:
            o = QSqrt2.coerce(o)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt2(-self.a, -self.b)

    def __sub__(self, o):
        try:
            o = QSqrt2.coerce(o)
        except TypeError:
            return NotImplemented
        return QSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return QSqrt2.coerce(o) - self

    def __mul__(self, o):
        try:
            o = QSqrt2.coerce(o)
        except TypeError:
            return NotImplemented
        if not o.b:
            if not self.b:
                return QSqrt2(self.a * o.a)
            return QSqrt2(self.a * o.a, self.b * o.a)
        if not self.b:
            return QSqrt2(self.a * o.a, self.a * o.b)
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self) -> "QSqrt2":
        """Galois conjugate a - b*sqrt(2)."""
        return QSqrt2(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "QSqrt2":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt2)")
        return QSqrt2(self.a / n, -self.b / n)

    def __truediv__(self, o):
        try:
            o = QSqrt2.coerce(o)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, o):
        return QSqrt2.coerce(o) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out, base = QSqrt2(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # order
    def sign(self) -> int:
        """Exact sign of a + b*sqrt(2)."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0:
            return sb
        if sb == 0 or sa == sb:
            return sa
        # opposite signs: compare a^2 with 2 b^2
        d = self.a * self.a - 2 * self.b * self.b
        return sa if d > 0 else (-sa if d < 0 else 0)

    def __eq__(self, o):
        if isinstance(o, (int, Fraction)):
            return self.b == 0 and self.a == o
        if not isinstance(o, QSqrt2):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, o):
        try:
            o = QSqrt2.coerce(o)
        except TypeError:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self):
        # the rational parts are exact; only sqrt(2) is rounded
        return float(self.a) + float(self.b) * math.sqrt(2)

    def to_float(self) -> float:
        return float(self)

    def __repr__(self):
        return f"QSqrt2({self.a}, {self.b})"

    def __str__(self):
        return render(self)


def _rat_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def render(x: QSqrt2) -> str:
    """Human text: 3, (3/2), (3/2)*sqrt2, (1 + 2*sqrt2)."""
    if x.b == 0:
        return _rat_text(x.a) if x.a >= 0 else "-" + _rat_text(-x.a)
    if x.b == 1:
        irr = "sqrt2"
    elif x.b == -1:
        irr = "-sqrt2"
    elif x.b < 0:
        irr = "-" + _rat_text(-x.b) + "*sqrt2"
    else:
        irr = _rat_text(x.b) + "*sqrt2"
    if x.a == 0:
        return irr
    sep = " - " if irr.startswith("-") else " + "
    a = _rat_text(x.a) if x.a >= 0 else "-" + _rat_text(-x.a)
    return f"({a}{sep}{irr.lstrip('-')})"


class CplxQ:
    """re + i*im with re, im in Q(sqrt 2)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", QSqrt2.coerce(re))
        object.__setattr__(self, "im", QSqrt2.coerce(im))

    def __setattr__(self, name, value):
        raise AttributeError("CplxQ is immutable")

    @staticmethod
    def coerce(x) -> "CplxQ":
        return x if isinstance(x, CplxQ) else CplxQ(x)

    def __add__(self, o):
        o = CplxQ.coerce(o)
        return CplxQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = CplxQ.coerce(o)
        return CplxQ(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return CplxQ(-self.re, -self.im)

    def __mul__(self, o):
        o = CplxQ.coerce(o)
        return CplxQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conj(self) -> "CplxQ":
        return CplxQ(self.re, -self.im)

    def __eq__(self, o):
        if not isinstance(o, CplxQ):
            try:
                o = CplxQ.coerce(o)
            except TypeError:
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CplxQ({self.re!r}, {self.im!r})"


ZERO = QSqrt2(0)
ONE = QSqrt2(1)
SQRT2 = QSqrt2(0, 1)
HALF_SQRT2 = QSqrt2(0, Fraction(1, 2))
