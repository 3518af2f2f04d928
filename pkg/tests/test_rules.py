"""Rule-local soundness, checked exactly on random valid states.

Term rules: at every valuation some case whose context holds carries
exactly the value of the term. Poly rules: if every produced implication
holds at a valuation satisfying the context, then lhs >= rhs there.
"""

from fractions import Fraction

import numpy as np
import pytest

from _support import rational_density
from qcost import density
from qcost.arith import Poly, QSqrt2, RatFun
from qcost.constraints import CostConstraint, PolyOptions, cost_to_poly, instantiate, rhs_cases
from qcost.expect import CostExpr, TCost, atom, bvar, conj, neg
from qcost.expect import formula as F
from qcost.expect import terms as T
from qcost.frontend import load, loops
from qcost.transformer import Transformer, frame_of

SAMPLES = 500


def _valuation(prog_decls, n, rng):
    env = {}
    for v, k in prog_decls.items():
        if k == "bool":
            env[v] = bool(rng.integers(0, 2))
        elif k == "int":
            env[v] = int(rng.integers(-4, 9))
    env.update(density.rational_valuation(*rational_density(n, rng)))
    # occasionally a basis state, so that outcome probabilities hit 0 and 1
    if n and rng.random() < 0.2:
        dim = 1 << n
        k = int(rng.integers(0, dim))
        re = [[Fraction(int(i == j == k)) for j in range(dim)] for i in range(dim)]
        env.update(density.rational_valuation(re, [[Fraction(0)] * dim for _ in range(dim)]))
    return env


def _holds(f, env):
    try:
        return F.evaluate(f, env, exact=True)
    except ZeroDivisionError:
        return False


def _ref(t, env, alpha):
    """Value of a term; branches of probability zero contribute nothing."""
    if isinstance(t, T.TFun):
        return instantiate(alpha, t).evaluate_exact(env)
    if isinstance(t, T.TCost):
        return t.cost.evaluate_exact(env)
    if isinstance(t, T.TConsume):
        a = t.amount.eval(env)
        return (a if a > QSqrt2(0) else QSqrt2(0)) + _ref(t.rest, env, alpha)
    if isinstance(t, T.TCharge):
        return t.cost.evaluate_exact(env) + _ref(t.rest, env, alpha)
    if isinstance(t, T.TCond):
        return _ref(t.then if F.evaluate(t.cond, env, exact=True) else t.orelse, env, alpha)
    if isinstance(t, T.TMeasure):
        out = QSqrt2(0)
        for p, sub in ((t.p0, t.t0), (t.p1, t.t1)):
            pv = p.eval(env)
            if pv:
                out = out + pv * _ref(sub, env, alpha)
        return out
    raise TypeError(t)


def _alpha(loc, n, ints, rng):
    body = RatFun.const(int(rng.integers(0, 4)))
    for v in density.density_vars(n)[: 1 << n]:
        body = body + RatFun.var(v) * RatFun.const(int(rng.integers(0, 5)))
    for v in ints:
        body = body + RatFun.var(v) * RatFun.const(int(rng.integers(1, 3)))
    guard = atom(sum((RatFun.var(v) for v in ints), RatFun.const(0)), ">=", True) if ints else F.TRUE
    return {loc: CostExpr.norm(guard, body) + CostExpr.const(1)}


PROGRAMS = {
    "tick": "var x : int; while x > 0 { consume(x); x := x - 1; }",
    "cond": "var b : bool; var x : int; while b { if x > 2 { consume(3) } else { consume(1) }; b := false; }",
    "meas": ("var x : bool; var q1, q2 : qubit;"
             "while !x { consume(1); q1 *= X; q1 *= H; q1, q2 *= CNOT; x <- meas(q1); }"),
    "measp": "var b : bool; var q : qubit; while b { consume(2); q := |0>; q *= H; b <- meas(q); if b { consume(1) } }",
    "fun": "var x : int; var b : bool; var q : qubit; while b { q *= H; b <- meas(q); x := x + 1; }",
}


def _side_conditions(src):
    prog = load(src)
    loop = loops(prog.body)[0]
    _, scs = Transformer(prog).infer(prog.body, TCost(CostExpr.zero()))
    return prog, loop, scs


def _check_cases(prog, loc, scs, seed):
    rng = np.random.default_rng(seed)
    n = prog.n_qubits
    ints = [v for v, k in prog.decls.items() if k == "int"]
    for i in range(SAMPLES):
        alpha = _alpha(loc, n, ints, rng)
        env = _valuation(prog.decls, n, rng)
        for sc in scs:
            want = _ref(sc.rhs, env, alpha)
            cases = rhs_cases(sc.rhs, alpha, n)
            hits = [c for phi, c in cases if _holds(phi, env)]
            assert any(c.evaluate_exact(env) == want for c in hits), (i, env, str(sc))


@pytest.mark.parametrize("rule", sorted(PROGRAMS))
def test_term_rules(rule):
    prog, loop, scs = _side_conditions(PROGRAMS[rule])
    if rule == "measp":
        assert any(isinstance(x, T.TMeasure) for sc in scs for x in T.walk(sc.rhs))
    _check_cases(prog, loop.loc, scs, hash(rule) % 2**32)


def test_charge_rule():
    prog = load("""
    var i, j : int;
    while i > 0 { j := 3; while j > 0 { consume(1); j := j - 1; } i := i - 1; }
    """)
    outer = loops(prog.body)[0]
    inner = loops(outer.body)[0]
    fr = frame_of(inner, CostExpr.norm(atom(RatFun.var("i"), ">=", True), RatFun.var("i")))
    _, scs = Transformer(prog, frames={id(inner): fr}).infer(prog.body, TCost(CostExpr.zero()))
    assert any(isinstance(x, T.TCharge) for sc in scs for x in T.walk(sc.rhs))
    _check_cases(prog, outer.loc, scs, 99)


# cost -> poly

x, y = RatFun.var("x"), RatFun.var("y")
d1, d2, a12 = RatFun.var("d1"), RatFun.var("d2"), RatFun.var("a12")
half = RatFun.const(1) / RatFun.const(2)


def _c(k):
    return CostExpr.const(k)


POLY_CASES = {
    # guards on the left split the context
    "guard_l": (F.TRUE, CostExpr.norm(atom(x, ">=", True), x) + _c(1), CostExpr.norm(atom(x - RatFun.const(2), ">=", True), x - RatFun.const(1))),
    "guard_l_tight": (atom(x, ">=", True), CostExpr.norm(atom(x - y, ">", True), x - y), CostExpr.norm(atom(x, ">=", True), x - y)),
    # guards on the right
    "guard_r": (bvar("b"), CostExpr.norm(F.TRUE, x * x) + _c(1), CostExpr.norm(conj(bvar("b"), atom(x, ">=", True)), RatFun.const(2) * x)),
    "guard_r_neg": (F.TRUE, CostExpr.norm(atom(y, ">=", True), y), CostExpr.norm(neg(atom(y, ">=", True)), -y)),
    # denominators on the left
    "div_l": (atom(d1, ">"), CostExpr.norm(F.TRUE, RatFun.const(1) / d1), _c(1)),
    "div_l_bad": (atom(d1, ">"), CostExpr.norm(F.TRUE, RatFun.const(1) / d1), _c(2)),
    # denominators on the right
    "div_r": (atom(d1 + a12, ">"), CostExpr.norm(F.TRUE, RatFun.const(2)),
              CostExpr.norm(F.TRUE, (d1 - a12) / (d1 + a12 + RatFun.const(1)))),
    "div_r_prob": (conj(atom(d1, ">"), atom(d2, ">")), _c(1), CostExpr.norm(F.TRUE, d2 / (d1 + d2), prob=d1 + d2)),
    "div_r_bad": (atom(d1, ">"), _c(1), CostExpr.norm(F.TRUE, d2 / d1)),
}


def _poly_holds(pc, env):
    for p in pc.nonstrict:
        if p.eval(env) < QSqrt2(0):
            return True
    for p in pc.strict:
        if not p.eval(env) > QSqrt2(0):
            return True
    g = pc.goal.eval(env)
    return g > QSqrt2(0) if pc.strict_goal else g >= QSqrt2(0)


def _defined(c, env):
    try:
        return c.evaluate_exact(env)
    except ZeroDivisionError:
        return None


@pytest.mark.parametrize("level", [0, 1, 2])
@pytest.mark.parametrize("rule", sorted(POLY_CASES))
def test_poly_rules(rule, level):
    ctx, lhs, rhs = POLY_CASES[rule]
    pcs = cost_to_poly(CostConstraint(ctx, lhs, rhs), PolyOptions(1, level))
    rng = np.random.default_rng(hash((rule, level)) % 2**32)
    decls = {"x": "int", "y": "int", "b": "bool"}
    violated = 0
    for _ in range(SAMPLES):
        env = _valuation(decls, 1, rng)
        if not _holds(ctx, env):
            continue
        lv, rv = _defined(lhs, env), _defined(rhs, env)
        if lv is None or rv is None:
            continue
        if lv < rv:
            violated += 1
            assert not all(_poly_holds(pc, env) for pc in pcs), (rule, env)
    if rule.endswith("_bad"):
        assert violated
