"""Shared helpers for the test suite."""

from __future__ import annotations

import functools
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Dict, Mapping

import numpy as np

from qcost import density
from qcost.driver import AnalysisConfig, AnalysisResult, analyze
from qcost.frontend import load_file
from qcost.frontend.ast import Program
from qcost.oracle import sample_store

BENCH = os.path.join(os.path.dirname(__file__), "..", "src", "qcost", "benchmarks")


def bench_path(name: str) -> str:
    return os.path.abspath(os.path.join(BENCH, name + ".imq"))


@functools.lru_cache(maxsize=None)
def bench(name: str) -> Program:
    return load_file(bench_path(name))


SMT_ROOT = tempfile.mkdtemp(prefix="qcost-smt-")


@dataclass
class Run:
    res: AnalysisResult
    systems: list  # (LinearSystem, Outcome) for every solver call
    smt_dir: str
    seconds: float


def run_analysis(name: str, tag: str = "a") -> Run:
    """Analyse a benchmark, recording solver calls and emitting SMT files."""
    from unittest import mock

    from qcost import driver

    seen = []
    real = driver.solve_system

    def spy(sysm, *a, **kw):
        out = real(sysm, *a, **kw)
        seen.append((sysm, out))
        return out

    smt_dir = os.path.join(SMT_ROOT, tag, name)
    t0 = time.monotonic()
    with mock.patch.object(driver, "solve_system", spy):
        res = analyze(bench(name), AnalysisConfig(budget=600, emit_smt=smt_dir), name)
    return Run(res, seen, smt_dir, time.monotonic() - t0)


@functools.lru_cache(maxsize=None)
def cached_run(name: str) -> Run:
    return run_analysis(name)


def analysed(name: str) -> AnalysisResult:
    """Analysis with default settings, shared across test modules."""
    return cached_run(name).res


def random_valuation(prog: Program, rng: np.random.Generator, int_range=(0, 8)) -> Dict[str, object]:
    env: Dict[str, object] = dict(sample_store(prog, rng, int_range))
    env.update(density.state_valuation(density.sample_density(prog.n_qubits, rng)))
    return env


def semantically_equal(bound, expected: Callable[[Mapping[str, object]], float], prog: Program,
                       samples: int = 1000, tol: float = 1e-9, seed: int = 7,
                       int_range=(0, 8)) -> float:
    """Largest disagreement over random valid states; raises if above ``tol``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        env = random_valuation(prog, rng, int_range)
        got, want = bound.evaluate(env), expected(env)
        worst = max(worst, abs(got - want))
        if abs(got - want) > tol:
            raise AssertionError(f"bound {bound} is {got}, expected {want} at {env}")
    return worst


def rational_density(n: int, rng: np.random.Generator, spread: int = 3):
    """Exact density matrix A A^dagger / tr with small Gaussian-integer A, as Fraction parts."""
    from fractions import Fraction

    dim = 1 << n
    re = rng.integers(-spread, spread + 1, size=(dim, dim))
    im = rng.integers(-spread, spread + 1, size=(dim, dim))
    if not (re.any() or im.any()):
        re[0, 0] = 1
    a = [[complex(int(re[i, j]), int(im[i, j])) for j in range(dim)] for i in range(dim)]
    m_re = [[0] * dim for _ in range(dim)]
    m_im = [[0] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(dim):
            s = sum(a[i][k] * a[j][k].conjugate() for k in range(dim))
            m_re[i][j], m_im[i][j] = int(s.real), int(s.imag)
    tr = sum(m_re[i][i] for i in range(dim))
    return ([[Fraction(x, tr) for x in row] for row in m_re],
            [[Fraction(x, tr) for x in row] for row in m_im])


REQUIRED = ["minus_x", "coin", "rus2", "ruswhile", "rus_showcase",
            "rus_i_2iz", "rus_2x_sqrt2y_z", "rus_i_isqrt2x", "rus_3i_2iz"]


def mutate(model, var, factor):
    from qcost.arith import QSqrt2

    out = dict(model)
    out[var] = out[var] * QSqrt2(factor)
    return out


CRITERIA: Dict[int, str] = {}


class criterion:
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    def __init__(self, n: int, title: str):
        self.n, self.title, self.notes = n, title, []

    def note(self, text: str):
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.notes + ([str(exc).splitlines()[0]] if exc is not None and str(exc) else []))
        line = f"{status} criterion {self.n}: {self.title}" + (f" ({detail})" if detail else "")
        CRITERIA[self.n] = line
        print(line)
        return False
