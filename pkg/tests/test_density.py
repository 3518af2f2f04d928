import itertools

import numpy as np
import pytest

from _support import rational_density
from qcost import density, oracle
from qcost.arith import RatFun

ONE_QUBIT = [g for g, k in density.GATE_ARITY.items() if k == 1]
TWO_QUBIT = [g for g, k in density.GATE_ARITY.items() if k == 2]


def test_hadamard_mapping_verbatim():
    d1, d2, a12, b12 = (RatFun.var(v) for v in ("d1", "d2", "a12", "b12"))
    m = density.gate_mapping("H", (1,), 1)
    half = RatFun.const(1) / RatFun.const(2)
    assert m["d1"] == half * (d1 + d2 + a12 * RatFun.const(2))
    assert m["d2"] == half * (d1 + d2 - a12 * RatFun.const(2))
    assert m["a12"] == half * (d1 - d2)
    assert m["b12"] == -b12


@pytest.mark.parametrize("gate", sorted(density.GATES))
def test_gates_unitary(gate):
    u = density.gate_matrix(gate)
    assert np.linalg.norm(u @ u.conj().T - np.eye(len(u))) < 1e-12


def _placements(n):
    for g in sorted(density.GATES):
        k = density.GATE_ARITY[g]
        for t in itertools.permutations(range(1, n + 1), k):
            yield g, t


@pytest.mark.parametrize("gate, targets", list(_placements(2)))
def test_symbolic_mapping_matches_numeric(gate, targets):
    rng = np.random.default_rng(hash((gate, targets)) % 2**32)
    m = density.gate_mapping(gate, targets, 2)
    u = density.lifted_matrix(gate, targets, 2)
    for _ in range(5):
        rho = density.sample_density(2, rng)
        env = density.state_valuation(rho)
        want = density.state_valuation(u @ rho @ u.conj().T)
        for v, f in m.items():
            assert abs(f.eval_float(env) - want[v]) < 1e-12


@pytest.mark.parametrize("gate, targets", list(_placements(3)))
def test_local_gate_matches_lifted(gate, targets):
    rng = np.random.default_rng(1)
    rho = density.sample_density(3, rng)
    u = density.lifted_matrix(gate, targets, 3)
    assert np.allclose(oracle.apply_gate(gate, targets, rho, 3), u @ rho @ u.conj().T, atol=1e-13)


def test_measurement_mapping_exact():
    rng = np.random.default_rng(3)
    for _ in range(20):
        re, im = rational_density(2, rng)
        env = density.rational_valuation(re, im)
        for q, b in itertools.product((1, 2), (0, 1)):
            p, m = density.measure_mapping(q, b, 2)
            pv = p.eval(env)
            want = sum(re[i][i] for i in range(4) if density.bit(i, q, 2) == b)
            assert pv == want
            if pv:
                assert sum(m[f"d{i}"].eval(env) for i in range(1, 5)) == 1


def test_sampler_gives_density_matrices():
    rng = np.random.default_rng(0)
    for n in range(1, 4):
        rho = density.sample_density(n, rng)
        assert np.allclose(rho, rho.conj().T)
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_trace_poly():
    assert str(density.trace_poly(2)) == "d1 + d2 + d3 + d4"
    assert len(density.density_vars(2)) == 16
