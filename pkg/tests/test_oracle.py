import json
import re

import numpy as np
import pytest

from _support import bench, bench_path
from qcost import density, oracle
from qcost.expect import CostExpr
from qcost.frontend import load


def _trial_success_program():
    src = open(bench_path("ruswhile"), encoding="utf-8").read()
    head, _, _ = src.partition("repeat := true;")
    return load(head + "repeat := true;\ntrial(q, repeat);\nif !repeat { consume(1) }\n")


def test_rus_trial_success_probability():
    prog = _trial_success_program()
    rng = np.random.default_rng(5)
    for _ in range(20):
        store, rho = oracle.sample_state(prog, rng)
        run = oracle.expected_cost(prog, store, rho, 8)
        assert abs(run.cost - 5 / 8) < 1e-12


@pytest.mark.parametrize("name", ["minus_x", "coin", "ruswhile", "rus_showcase", "rus_i_2iz"])
def test_mass_is_preserved(name):
    prog = bench(name)
    rng = np.random.default_rng(11)
    store, rho = oracle.sample_state(prog, rng)
    run = oracle.expected_cost(prog, store, rho, 64)
    assert abs(run.terminated + run.truncated + run.dropped - 1) < 1e-9


def test_truncation_is_monotone_in_depth():
    prog = bench("ruswhile")
    rng = np.random.default_rng(2)
    store, rho = oracle.sample_state(prog, rng)
    costs = [oracle.expected_cost(prog, store, rho, d).cost for d in (1, 2, 4, 8, 16, 64)]
    assert all(a <= b + 1e-12 for a, b in zip(costs, costs[1:]))


def test_ruswhile_converges():
    prog = bench("ruswhile")
    store, rho = oracle.sample_state(prog, np.random.default_rng(0))
    run = oracle.expected_cost(prog, store, rho, 512)
    assert abs(run.cost - 16 / 5) < 1e-6


def test_minus_x_on_basis_state():
    prog = bench("minus_x")
    run = oracle.expected_cost(prog, {"x": False}, oracle.basis_state("10", 2), 512)
    assert abs(run.cost - 1) < 1e-9


def test_violation_is_reported():
    prog = load("var x : bool; consume(1);")
    chk = oracle.check_bound(CostExpr.const(0), prog, {"x": False}, oracle.basis_state("", 0), 4)
    assert not chk.ok and chk.lower == 1


def test_unitarity_of_sampled_gates():
    for g in density.GATES:
        u = density.gate_matrix(g)
        assert np.abs(u @ u.conj().T - np.eye(len(u))).max() < 1e-12


def test_load_state(tmp_path):
    prog = bench("minus_x")
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"classical": {"x": True}, "basis": "01"}))
    store, rho = oracle.load_state(str(p), prog)
    assert store == {"x": True} and rho[1, 1] == 1
    p.write_text(json.dumps({"matrix": [[0.5, [0, 0.5]], [[0, -0.5], 0.5]]}))
    with pytest.raises(ValueError):
        oracle.load_state(str(p), prog)
    p.write_text(json.dumps({"classical": {"y": 1}}))
    with pytest.raises(ValueError):
        oracle.load_state(str(p), prog)


def test_sample_store_respects_range():
    prog = bench("chain")
    rng = np.random.default_rng(0)
    for _ in range(50):
        store = oracle.sample_store(prog, rng, (0, 3))
        assert all(0 <= v <= 3 for v in store.values() if type(v) is int)
