from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qcost.arith import Poly, QSqrt2, RatFun, render

rats = st.fractions(min_value=-50, max_value=50, max_denominator=30)
q2 = st.builds(QSqrt2, rats, rats)
nonzero = q2.filter(bool)


@given(q2, q2, q2)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == QSqrt2(0)


@given(nonzero)
def test_inverse(x):
    assert x * x.inverse() == QSqrt2(1)
    assert x / x == QSqrt2(1)


@given(q2, q2)
def test_order_matches_floats(x, y):
    if abs(float(x) - float(y)) > 1e-9:
        assert (x < y) == (float(x) < float(y))


@given(q2)
def test_sign_and_norm(x):
    assert x.sign() == (0 if not x else (1 if float(x) > 0 else -1))
    assert x.norm() == x.a * x.a - 2 * x.b * x.b


def test_sqrt2_squares_to_two():
    s = QSqrt2.sqrt2()
    assert s * s == QSqrt2(2)
    assert render(QSqrt2(Fraction(1, 2), 1)) == "((1/2) + sqrt2)"


polys = st.builds(
    lambda cs: sum((Poly.var(v).scale(QSqrt2(c)) for v, c in cs), Poly.const(0)),
    st.lists(st.tuples(st.sampled_from(["x", "y", "d1", "a12"]), rats), max_size=4),
)
envs = st.fixed_dictionaries({v: rats for v in ["x", "y", "d1", "a12"]})


@given(polys, polys, envs)
def test_poly_ring_homomorphism(p, q, env):
    assert (p * q).eval(env) == p.eval(env) * q.eval(env)
    assert (p + q).eval(env) == p.eval(env) + q.eval(env)
    assert (p - p).is_zero()


@given(polys, polys, envs)
def test_poly_substitution(p, q, env):
    sub = p.subs({"x": q})
    inner = dict(env, x=q.eval(env))
    assert sub.eval(env) == p.eval(inner)


@given(polys, polys)
def test_divide_exact_roundtrip(p, q):
    if q.is_zero():
        return
    assert (p * q).divide_exact(q) == p


@settings(max_examples=50)
@given(polys, polys, envs)
def test_ratfun_arithmetic(p, q, env):
    if q.is_zero() or not q.eval(env):
        return
    r = RatFun(p) / RatFun(q)
    assert r.eval(env) == p.eval(env) / q.eval(env)
    assert (r * RatFun(q)).eval(env) == p.eval(env)


def test_ratfun_cancels_common_factor():
    x = RatFun.var("x")
    r = (x * x + x) / x
    assert r.is_poly() and r.to_poly() == Poly.var("x") + Poly.const(1)


def test_normalize_positive_scales_to_monic():
    p = Poly.var("x").scale(QSqrt2(4)) + Poly.const(2)
    c, body = p.normalize_positive()
    assert c > QSqrt2(0)
    assert body.scale(c) == p
