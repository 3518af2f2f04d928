"""Finding exact certificates.

The encoded system is linear, so a linear program picks the template
coefficients of least total weight. Norms of higher degree weigh more, so
slopes are kept small before constants. Its floating-point vertex is then
rebuilt exactly: the equations restricted to the vertex's support are
solved by elimination over Q(sqrt2). The external SMT solver is the fallback
whenever that reconstruction does not verify.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

from ..arith import QSqrt2
from . import smt
from .handelman import LinearSystem, verify

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-9
STRICT_EPS = 1e-7


@dataclass
class Outcome:
    status: str  # "sat" | "unsat" | "timeout" | "unknown"
    model: Dict[str, QSqrt2] = field(default_factory=dict)
    method: str = ""
    smt_calls: int = 0
    detail: str = ""


def _lp(sysm: LinearSystem, timeout: float):
    names = sysm.variables()
    col = {v: i for i, v in enumerate(names)}
    data, ri, ci, b = [], [], [], []
    for r, (lin, rhs) in enumerate(sysm.rows):
        for v, c in lin.items():
            data.append(float(c))
            ri.append(r)
            ci.append(col[v])
        b.append(float(rhs))
    a_eq = csr_matrix((data, (ri, ci)), shape=(len(sysm.rows), len(names))) if sysm.rows else None
    a_ub, b_ub = None, None
    if sysm.strict_rows:
        d2, r2, c2 = [], [], []
        for r, lin in enumerate(sysm.strict_rows):
            for v, c in lin.items():
                d2.append(-float(c))
                r2.append(r)
                c2.append(col[v])
        a_ub = csr_matrix((d2, (r2, c2)), shape=(len(sysm.strict_rows), len(names)))
        b_ub = np.full(len(sysm.strict_rows), -STRICT_EPS)
    unknown = set(sysm.unknowns)
    cost = np.array([sysm.weights.get(v, 1.0) if v in unknown else 0.0 for v in names])
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.array(b) if sysm.rows else None,
                  bounds=(0, None), method="highs-ds",
                  options={"time_limit": max(timeout, 0.1), "presolve": True})
    return names, res


def _rationalize(x: float) -> Fraction:
    return Fraction(x).limit_denominator(1 << 20)


def exact_on_support(sysm: LinearSystem, support: Sequence[str],
                     hint: Dict[str, float]) -> Optional[Dict[str, QSqrt2]]:
    """Solve the equations with every variable outside ``support`` fixed to 0.

    Free variables of an underdetermined support take rational
    approximations of ``hint``.
    """
    cols = list(support)
    idx = {v: i for i, v in enumerate(cols)}
    zero = QSqrt2(0)
    rows: List[List[QSqrt2]] = []
    for lin, rhs in sysm.rows:
        r = [zero] * (len(cols) + 1)
        for v, c in lin.items():
            if v in idx:
                r[idx[v]] = c
        r[-1] = rhs
        if any(r[:-1]) or r[-1]:
            rows.append(r)
    pivots: List[int] = []
    prow = 0
    for c in range(len(cols)):
        piv = next((i for i in range(prow, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[prow], rows[piv] = rows[piv], rows[prow]
        inv = rows[prow][c].inverse()
        rows[prow] = [x * inv for x in rows[prow]]
        for i in range(len(rows)):
            if i != prow and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[prow])]
        pivots.append(c)
        prow += 1
        if prow == len(rows):
            break
    for i in range(prow, len(rows)):
        if rows[i][-1] and not any(rows[i][:-1]):
            return None
    free = [c for c in range(len(cols)) if c not in pivots]
    values: Dict[int, QSqrt2] = {c: QSqrt2(_rationalize(hint.get(cols[c], 0.0))) for c in free}
    for i, c in enumerate(pivots):
        v = rows[i][-1]
        for f in free:
            if rows[i][f]:
                v = v - rows[i][f] * values[f]
        values[c] = v
    return {cols[c]: values[c] for c in range(len(cols))}


def solve_system(sysm: LinearSystem, timeout: float = 10.0, solver: Optional[str] = None,
                 backend: str = "auto") -> Outcome:
    """Find a verified certificate; ``backend`` is "auto" (LP, then SMT) or "smt"."""
    deadline = time.monotonic() + timeout
    calls = 0
    if backend == "auto":
        names, res = _lp(sysm, timeout)
        if res.status == 2:
            return Outcome("unsat", method="lp", detail="linear relaxation infeasible")
        if res.status == 1:
            return Outcome("timeout", method="lp")
        if res.status == 0:
            x = dict(zip(names, res.x))
            support = [v for v in names if x[v] > SUPPORT_TOL]
            model = exact_on_support(sysm, support, x)
            if model is not None and verify(sysm, model) is None:
                return Outcome("sat", _complete(sysm, model), "lp+exact")
            # pin the LP's zero variables and let the SMT solver find exact values
            pins = [f"(assert (= {v} 0))" for v in names if x[v] <= SUPPORT_TOL]
            rem = deadline - time.monotonic()
            if rem > 0:
                calls += 1
                r = smt.solve(smt.emit(sysm, pins), solver, rem)
                if r.status == "sat":
                    m = _complete(sysm, r.model)
                    if verify(sysm, m) is None:
                        return Outcome("sat", m, "lp+smt", calls)
    rem = deadline - time.monotonic()
    if rem <= 0:
        return Outcome("timeout", smt_calls=calls)
    calls += 1
    r = smt.solve(smt.emit(sysm), solver, rem)
    if r.status != "sat":
        return Outcome(r.status, method="smt", smt_calls=calls)
    m = _complete(sysm, r.model)
    why = verify(sysm, m)
    if why is not None:
        return Outcome("unknown", method="smt", smt_calls=calls, detail=f"model rejected: {why}")
    return Outcome("sat", m, "smt", calls)


def _complete(sysm: LinearSystem, model: Dict[str, QSqrt2]) -> Dict[str, QSqrt2]:
    return {v: model.get(v, QSqrt2(0)) for v in sysm.variables()}
