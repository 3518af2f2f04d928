from fractions import Fraction

from hypothesis import given, strategies as st

from qcost.arith import RatFun
from qcost.expect import CostExpr, TCost, atom, bvar, charge, close, cond, conj, consume, disj, iff, neg
from qcost.expect import formula as F
from qcost.expect.terms import TFun, SymState, measure

x, y = RatFun.var("x"), RatFun.var("y")
ints = st.integers(-6, 6)


@st.composite
def formulas(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        kind = draw(st.sampled_from(["b", "c", "a"]))
        if kind == "b":
            return bvar(draw(st.sampled_from(["p", "q"])))
        if kind == "c":
            return F.TRUE if draw(st.booleans()) else F.FALSE
        rel = draw(st.sampled_from([">=", ">", "=="]))
        return atom(x * RatFun.const(draw(ints)) + y - RatFun.const(draw(ints)), rel, True)
    op = draw(st.sampled_from(["and", "or", "not", "iff"]))
    a = draw(formulas(depth - 1))
    if op == "not":
        return neg(a)
    b = draw(formulas(depth - 1))
    return {"and": conj, "or": disj, "iff": iff}[op](a, b)


def _naive(f, env):
    if f == F.TRUE:
        return True
    if f == F.FALSE:
        return False
    return F.evaluate(f, env, exact=True)


envs = st.fixed_dictionaries({"x": ints, "y": ints, "p": st.booleans(), "q": st.booleans()})


@given(formulas(), formulas(), envs)
def test_connectives(a, b, env):
    va, vb = _naive(a, env), _naive(b, env)
    assert F.evaluate(conj(a, b), env, exact=True) == (va and vb)
    assert F.evaluate(disj(a, b), env, exact=True) == (va or vb)
    assert F.evaluate(neg(a), env, exact=True) == (not va)
    assert F.evaluate(iff(a, b), env, exact=True) == (va == vb)


@given(formulas(), envs)
def test_float_and_exact_agree(f, env):
    assert F.evaluate(f, env) == F.evaluate(f, env, exact=True)


def test_integral_strict_atoms_tighten():
    # over the integers x > 0 is x - 1 >= 0
    f = atom(x, ">", True)
    assert F.evaluate(f, {"x": 1}, exact=True) and not F.evaluate(f, {"x": 0}, exact=True)


@given(ints, ints, envs)
def test_close_consume_is_clamped(a, b, env):
    e = x * RatFun.const(a) + RatFun.const(b)
    c = close(consume(e, TCost(CostExpr.zero())))
    want = max(0, a * env["x"] + b)
    assert c.evaluate_exact(env) == want


def test_smart_constructors():
    t = TCost(CostExpr.const(1))
    h = TFun("L1", SymState({}))
    assert cond(F.TRUE, t, h) is t and cond(F.FALSE, t, h) is h
    assert cond(bvar("p"), h, h) is h
    assert measure(RatFun.const(0), t, RatFun.const(1), h) is h
    assert consume(RatFun.const(-2), h) is h
    assert charge(CostExpr.zero(), h) is h
    assert close(charge(CostExpr.const(3), t)).constant_value() == 4


def test_close_measure_and_cond():
    p = RatFun.var("d1")
    t = measure(p, TCost(CostExpr.const(2)), RatFun.const(1) - p, TCost(CostExpr.zero()))
    t = cond(bvar("p"), t, TCost(CostExpr.const(5)))
    c = close(t)
    assert c.evaluate_exact({"p": True, "d1": Fraction(1, 4)}) == Fraction(1, 2)
    assert c.evaluate_exact({"p": False, "d1": Fraction(1, 4)}) == 5


def test_cost_text_is_stable():
    c = CostExpr.norm(atom(-x, ">=", True), -x).scale(2) + CostExpr.const(2)
    assert str(c) == str(CostExpr.const(2) + CostExpr.norm(atom(-x, ">=", True), -x).scale(2))
