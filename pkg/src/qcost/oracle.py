"""Numeric reference semantics.

Runs a program on a concrete classical store and density matrix, unrolling
every loop at most ``depth`` times per entry, and returns the truncated
expected cost. The truncated value is a lower bound on the true expected
cost, so any sound upper bound must dominate it.

Configurations that reach the same program point with the same live
classical variables and loop counters are merged by adding their
(unnormalised) density matrices. Consumption is linear in the matrix, so cost is accumulated
globally as amount times mass.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import density
from .expect.cost import CostExpr
from .frontend.ast import (
    Assign, Binary, BoolLit, Consume, Expr, Gate, If, IntLit, Measure, Program, Seq, Skip,
    Stmt, Unary, Var, While, expr_vars,
)

DROP = 1e-15

Store = Tuple[Tuple[str, object], ...]


def eval_expr(e: Expr, store: Mapping[str, object]):
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Var):
        return store[e.name]
    if isinstance(e, Unary):
        v = eval_expr(e.arg, store)
        return (not v) if e.op == "!" else -v
    l = eval_expr(e.left, store)
    if e.op == "&&":
        return bool(l) and bool(eval_expr(e.right, store))
    if e.op == "||":
        return bool(l) or bool(eval_expr(e.right, store))
    r = eval_expr(e.right, store)
    return {
        "+": lambda: l + r, "-": lambda: l - r, "*": lambda: l * r,
        "==": lambda: l == r, "!=": lambda: l != r, "<": lambda: l < r,
        "<=": lambda: l <= r, ">": lambda: l > r, ">=": lambda: l >= r,
    }[e.op]()


@dataclass
class OracleRun:
    cost: float  # truncated expected cost
    terminated: float  # mass of runs that finished
    truncated: float  # mass still inside a loop at the unrolling limit
    dropped: float  # mass of negligible branches discarded


@lru_cache(maxsize=None)
def _mask(qubit: int, outcome: int, n: int) -> np.ndarray:
    """Entrywise mask equal to P rho P for the projector P onto the outcome."""
    v = np.array([1.0 if density.bit(i, qubit, n) == outcome else 0.0 for i in range(1 << n)])
    m = np.outer(v, v)
    m.setflags(write=False)
    return m


def _apply_axes(t: np.ndarray, u: np.ndarray, axes: Tuple[int, ...]) -> np.ndarray:
    k = len(axes)
    front = np.moveaxis(t, axes, tuple(range(k)))
    shape = front.shape
    out = (u @ front.reshape(1 << k, -1)).reshape(shape)
    return np.moveaxis(out, tuple(range(k)), axes)


def apply_gate(gate: str, targets: Tuple[int, ...], rho: np.ndarray, n: int) -> np.ndarray:
    """U rho U^dagger, touching only the target axes (targets are 1-based)."""
    u = density.gate_matrix(gate)
    t = rho.reshape((2,) * (2 * n))
    t = _apply_axes(t, u, tuple(q - 1 for q in targets))
    t = _apply_axes(t, u.conj(), tuple(n + q - 1 for q in targets))
    return t.reshape(rho.shape)


class Interpreter:
    def __init__(self, prog: Program, depth: int):
        self.prog = prog
        self.n = prog.n_qubits
        self.depth = depth
        self._ids: Dict[int, int] = {}
        self._nodes: List[Stmt] = []
        self._live: Dict[Tuple[int, frozenset], frozenset] = {}
        self._stack_live: Dict[tuple, frozenset] = {}

    def intern(self, s: Stmt) -> int:
        # AST hashing is deep, so stacks hold small integer handles instead
        i = self._ids.get(id(s))
        if i is None:
            i = self._ids[id(s)] = len(self._nodes)
            self._nodes.append(s)
        return i

    def live_in(self, sid: int, out: frozenset) -> frozenset:
        k = (sid, out)
        r = self._live.get(k)
        if r is None:
            r = self._live[k] = self._live_in(self._nodes[sid], out)
        return r

    def _live_in(self, s: Stmt, out: frozenset) -> frozenset:
        h = self.intern
        if isinstance(s, Seq):
            return self.live_in(h(s.first), self.live_in(h(s.second), out))
        if isinstance(s, Assign):
            return (out - {s.var}) | frozenset(expr_vars(s.expr))
        if isinstance(s, Measure):
            return out - {s.var}
        if isinstance(s, Consume):
            return out | frozenset(expr_vars(s.expr))
        if isinstance(s, If):
            return (frozenset(expr_vars(s.cond)) | self.live_in(h(s.then), out)
                    | self.live_in(h(s.orelse), out))
        if isinstance(s, While):
            live = out | frozenset(expr_vars(s.cond))
            while True:
                nxt = live | self.live_in(h(s.body), live)
                if nxt == live:
                    return live
                live = nxt
        return out

    def stack_live(self, sids: Tuple[int, ...]) -> frozenset:
        r = self._stack_live.get(sids)
        if r is None:
            r = frozenset() if not sids else self.live_in(sids[0], self.stack_live(sids[1:]))
            self._stack_live[sids] = r
        return r

    def run(self, store: Mapping[str, object], rho: np.ndarray) -> OracleRun:
        costs: List[float] = []
        done: List[float] = []
        cut: List[float] = []
        lost: List[float] = []
        stack0 = self.push(self.prog.body, (), ())
        start = (tuple(sorted(store.items())), tuple(sid for sid, _ in stack0))
        work: Dict[tuple, tuple] = {start: (np.array(rho, dtype=complex), stack0)}
        while work:
            nxt: Dict[tuple, tuple] = {}
            for (st, _), (r, stack) in work.items():
                mass = float(np.trace(r).real)
                if mass < DROP:
                    lost.append(max(mass, 0.0))
                    continue
                if not stack:
                    done.append(mass)
                    continue
                for st2, stk2, r2 in self.step(dict(st), stack, r, mass, costs, cut):
                    key = (st2, tuple(sid for sid, _ in stk2))
                    prev = nxt.get(key)
                    if prev is None:
                        nxt[key] = (r2, stk2)
                    else:
                        nxt[key] = (prev[0] + r2, _merge_counters(prev[1], stk2))
            work = nxt
        return OracleRun(math.fsum(costs), math.fsum(done), math.fsum(cut), math.fsum(lost))

    def push(self, s: Stmt, counters, rest):
        """Stack with ``s`` on top, sequences unfolded and skips dropped."""
        while True:
            if isinstance(s, Skip):
                return rest
            if not isinstance(s, Seq):
                return ((self.intern(s), counters),) + rest
            rest = self.push(s.second, counters, rest)
            s = s.first

    def step(self, store, stack, rho, mass, costs, cut):
        (sid, counters), rest = stack[0], stack[1:]
        s = self._nodes[sid]

        def key(st, stk):
            # dead variables are dropped so that configurations merge
            live = self.stack_live(tuple(sid for sid, _ in stk))
            return tuple(sorted((k, v) for k, v in st.items() if k in live)), stk

        if isinstance(s, Consume):
            amount = eval_expr(s.expr, store)
            if amount > 0:
                costs.append(amount * mass)
            yield (*key(store, rest), rho)
        elif isinstance(s, Assign):
            store[s.var] = eval_expr(s.expr, store)
            yield (*key(store, rest), rho)
        elif isinstance(s, Gate):
            targets = tuple(self.prog.qubit_index(q) for q in s.qubits)
            yield (*key(store, rest), apply_gate(s.gate, targets, rho, self.n))
        elif isinstance(s, Measure):
            i = self.prog.qubit_index(s.qubit)
            for outcome in (0, 1):
                st = dict(store)
                st[s.var] = bool(outcome)
                yield (*key(st, rest), rho * _mask(i, outcome, self.n))
        elif isinstance(s, If):
            branch = s.then if eval_expr(s.cond, store) else s.orelse
            yield (*key(store, self.push(branch, counters, rest)), rho)
        elif isinstance(s, While):
            # each stack item carries its own counters, so leaving a loop resets it
            k = dict(counters).get(s.loc, 0)
            if not eval_expr(s.cond, store):
                yield (*key(store, rest), rho)
            elif k >= self.depth:
                cut.append(mass)
            else:
                inner = tuple(sorted({**dict(counters), s.loc: k + 1}.items()))
                yield (*key(store, self.push(s.body, inner, ((sid, inner),) + rest)), rho)
        else:
            raise TypeError(f"unexpected statement {s!r}")


def _merge_counters(a, b):
    """Stacks with the same statements; each loop keeps the larger unrolling count.

    Cutting a merged configuration no later than either part keeps the
    result a lower bound.
    """
    if a == b:
        return a
    out = []
    for (sid, ca), (_, cb) in zip(a, b):
        if ca == cb:
            out.append((sid, ca))
        else:
            m = dict(ca)
            for loc, k in cb:
                m[loc] = max(m.get(loc, 0), k)
            out.append((sid, tuple(sorted(m.items()))))
    return tuple(out)


def expected_cost(prog: Program, store: Mapping[str, object], rho: np.ndarray, depth: int) -> OracleRun:
    return Interpreter(prog, depth).run(store, rho)


def valuation(store: Mapping[str, object], rho: np.ndarray) -> Dict[str, object]:
    env: Dict[str, object] = dict(store)
    env.update(density.state_valuation(rho))
    return env


@dataclass
class Check:
    bound: float
    lower: float
    residual: float
    ok: bool


def check_bound(bound: CostExpr, prog: Program, store: Mapping[str, object], rho: np.ndarray,
                depth: int, tol: float = 1e-6) -> Check:
    run = expected_cost(prog, store, rho, depth)
    b = bound.evaluate(valuation(store, rho))
    return Check(b, run.cost, run.truncated, run.cost <= b + tol)


# samplers


def sample_store(prog: Program, rng: np.random.Generator, int_range=(0, 8)) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for v, k in prog.decls.items():
        if k == "bool":
            out[v] = bool(rng.integers(0, 2))
        elif k == "int":
            out[v] = int(rng.integers(int_range[0], int_range[1] + 1))
    return out


def sample_state(prog: Program, rng: np.random.Generator) -> Tuple[Dict[str, object], np.ndarray]:
    return sample_store(prog, rng), density.sample_density(prog.n_qubits, rng)


def basis_state(bits: str, n: int) -> np.ndarray:
    bits = bits.strip().strip("|>").strip()
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise ValueError(f"basis state must be {n} bits, got {bits!r}")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    i = int(bits, 2) if bits else 0
    rho[i, i] = 1.0
    return rho


def _entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def load_state(path: str, prog: Program) -> Tuple[Dict[str, object], np.ndarray]:
    """JSON: {"classical": {...}, "basis": "01"} or {"classical": {...}, "matrix": [[...]]}.

    Matrix entries are numbers or [re, im] pairs. Unlisted classical
    variables default to false / 0.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    store: Dict[str, object] = {}
    given = data.get("classical", {})
    for v, k in prog.decls.items():
        if k == "bool":
            store[v] = bool(given.get(v, False))
        elif k == "int":
            store[v] = int(given.get(v, 0))
    unknown = set(given) - set(store)
    if unknown:
        raise ValueError(f"unknown classical variables: {sorted(unknown)}")
    n = prog.n_qubits
    if "matrix" in data:
        rho = np.array([[_entry(x) for x in row] for row in data["matrix"]], dtype=complex)
        if rho.shape != (1 << n, 1 << n):
            raise ValueError(f"matrix must be {1 << n}x{1 << n}")
        if not np.allclose(rho, rho.conj().T, atol=1e-9):
            raise ValueError("matrix is not Hermitian")
    else:
        rho = basis_state(str(data.get("basis", "0" * n)), n)
    return store, rho
