import numpy as np
import pytest

from _support import bench, rational_density
from qcost import density
from qcost.arith import Poly, QSqrt2, RatFun
from qcost.certificate import template_gen
from qcost.constraints import (
    CostConstraint, PolyOptions, cost_to_poly, density_context, prune_premises, reduce_side_conditions,
    term_to_cost,
)
from qcost.expect import CostExpr, TCost, atom, bvar
from qcost.frontend import loops
from qcost.transformer import Transformer, make_state


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("level", [0, 1, 2])
def test_density_facts_hold_on_states(n, level):
    rng = np.random.default_rng(n * 10 + level)
    facts = density_context(n, level)
    for _ in range(100):
        env = density.rational_valuation(*rational_density(n, rng))
        for p, strict in facts:
            v = p.eval(env)
            assert v > QSqrt2(0) if strict else v >= QSqrt2(0)


def test_density_context_grows_with_level():
    sizes = [len(density_context(2, lvl)) for lvl in range(3)]
    assert sizes[0] < sizes[1] < sizes[2]
    assert density_context(0, 2) == ()


def test_prune_keeps_connected_premises():
    x, y, z = Poly.var("x"), Poly.var("y"), Poly.var("z")
    prem = [(x - y, False), (y, True), (z, False)]
    assert prune_premises({"x"}, prem) == prem[:2]
    assert prune_premises({"z"}, prem) == [prem[2]]


def test_guard_splitting_produces_one_goal_per_branch():
    x = RatFun.var("x")
    lhs = CostExpr.norm(atom(x, ">=", True), x) + CostExpr.const(1)
    pcs = cost_to_poly(CostConstraint(bvar("b"), lhs, CostExpr.const(1)), PolyOptions(0))
    # x >= 0 branch needs x >= 0 ==> x >= 0; the other is trivial
    assert len(pcs) <= 2
    assert all(pc.goal.is_const() or "x" in {v for v in pc.goal.vars()} for pc in pcs)


def test_denominators_become_positivity_obligations():
    d1 = RatFun.var("d1")
    cc = CostConstraint(atom(d1 - RatFun.var("a12"), ">"), CostExpr.const(1),
                        CostExpr.norm(atom(d1, ">"), RatFun.const(1) / (d1 - RatFun.var("a12"))))
    pcs = cost_to_poly(cc, PolyOptions(1, 1))
    assert pcs and all(pc.goal.degree() <= 2 for pc in pcs)


def test_minus_x_reduction():
    prog = bench("minus_x")
    loop = loops(prog.body)[0]
    tpl = template_gen(loop.loc, Transformer(prog).conv.boolean(loop.cond), ["a13", "a24"], 1)
    domains = {loop.loc: make_state(prog, sorted(tpl.cost.vars()))}
    _, scs = Transformer(prog, domains).infer(prog.body, TCost(CostExpr.zero()))
    alpha = {loop.loc: tpl.cost}
    costs, polys = reduce_side_conditions(scs, alpha, PolyOptions(2, 1))
    assert costs and polys
    assert all(c.origin.startswith("L1#") for c in costs)
    for sc in scs:
        assert all(cc.lhs == tpl.cost.subs(*sc.lhs.state.split()) for cc in term_to_cost(sc, alpha, 2))
    unknowns = set(tpl.unknowns)
    assert all(pc.goal.vars() & unknowns or pc.goal.is_const() or pc.strict_goal for pc in polys)
