from fractions import Fraction

import pytest

from _support import REQUIRED, cached_run, mutate
from qcost.arith import Poly, QSqrt2
from qcost.certificate import CapExceeded, emit, encode, find_solver, solve, solve_system, template_gen, verify
from qcost.certificate.smt import parse_sexprs, value_of
from qcost.constraints import PolyConstraint
from qcost.expect import atom, bvar
from qcost.arith import RatFun

x, y = Poly.var("x"), Poly.var("y")
c0, c1 = Poly.var("_c0"), Poly.var("_c1")

needs_z3 = pytest.mark.skipif(find_solver() is None, reason="no SMT solver")


def _system(degree=1):
    # x >= 0, y >= 0  ==>  c0*x + c1 - 2x - 1 >= 0 ;  x - y >= 0 ==> c0 * x - c0 * y >= 0
    pcs = [
        PolyConstraint((x, y), (), x * c0 + c1 - x.scale(QSqrt2(2)) - Poly.const(1)),
        PolyConstraint((x - y,), (), (x - y) * c0),
    ]
    return encode(pcs, ["_c0", "_c1"], degree)


def test_lp_solution_is_exact_and_minimal():
    sysm = _system()
    out = solve_system(sysm, backend="auto")
    assert out.status == "sat" and out.method == "lp+exact"
    assert out.model["_c0"] == QSqrt2(2) and out.model["_c1"] == QSqrt2(1)
    assert verify(sysm, out.model) is None


@needs_z3
def test_smt_backend_agrees():
    sysm = _system()
    out = solve_system(sysm, backend="smt")
    assert out.status == "sat" and verify(sysm, out.model) is None


def test_unsat_detected():
    pcs = [PolyConstraint((x,), (), c0 - x)]  # no constant bounds every x
    out = solve_system(encode(pcs, ["_c0"], 2))
    assert out.status in ("unsat", "unknown")


def test_strict_goal_needs_strict_support():
    pcs = [PolyConstraint((), (x,), x * c0, strict_goal=True)]
    sysm = encode(pcs, ["_c0"], 1)
    out = solve_system(sysm)
    assert out.status == "sat" and out.model["_c0"] > QSqrt2(0)
    bad = dict(out.model, _c0=QSqrt2(0))
    assert verify(sysm, bad) is not None


def test_irrational_coefficients():
    s2 = QSqrt2(0, 1)
    pcs = [PolyConstraint((x,), (), c0 - x.scale(s2) + x.scale(s2) - Poly.const(s2))]
    out = solve_system(encode(pcs, ["_c0"], 1))
    assert out.status == "sat" and out.model["_c0"] == s2


def test_cap():
    pcs = [PolyConstraint(tuple(Poly.var(f"v{i}") for i in range(40)), (), c0)]
    with pytest.raises(CapExceeded):
        encode(pcs, ["_c0"], 3, cap=100)


def test_emit_is_deterministic():
    a, b = emit(_system(2)), emit(_system(2))
    assert a == b and "(check-sat)" in a
    assert "declare-const _c0 Real" in a or "declare-fun _c0 () Real" in a


@pytest.mark.parametrize("text, want", [
    ("3", QSqrt2(3)),
    ("(- (/ 1 4))", QSqrt2(Fraction(-1, 4))),
    ("(root-obj (+ (^ x 2) (- 2)) 2)", QSqrt2(0, 1)),
    ("(root-obj (+ (^ x 2) (- 2)) 1)", QSqrt2(0, -1)),
    ("(root-obj (+ (* 4 (^ x 2)) (* (- 4) x) (- 1)) 2)", QSqrt2(Fraction(1, 2), Fraction(1, 2))),
])
def test_model_value_parsing(text, want):
    assert value_of(parse_sexprs(text)[0]) == want


@needs_z3
def test_solver_returns_irrational_model():
    r = solve("(declare-const a Real)(assert (= (* a a) 2))(assert (> a 0))(check-sat)(get-value (a))")
    assert r.status == "sat" and r.model["a"] == QSqrt2(0, 1)


def test_template_levels_grow():
    g = bvar("b")
    sizes = [len(template_gen("L1", g, ["a12"], lvl, None, ["k"]).unknowns) for lvl in range(4)]
    assert sizes == sorted(sizes) and sizes[0] == 1


@pytest.mark.parametrize("name", REQUIRED)
def test_every_sat_result_verifies_and_resists_mutation(name):
    sats = [(s, o) for s, o in cached_run(name).systems if o.status == "sat"]
    if name != "rus2":
        assert sats
    for sysm, out in sats:
        assert verify(sysm, out.model) is None
        used = {v for row, _ in sysm.rows for v in row}
        for v in sorted(v for v in out.model if out.model[v] and v in used):
            assert verify(sysm, mutate(out.model, v, Fraction(1001, 1000))) is not None
