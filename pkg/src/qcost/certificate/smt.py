"""SMT-LIB2 emission, solver process handling and model parsing."""

from __future__ import annotations

import os
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

from ..arith import QSqrt2
from .handelman import LinearSystem

SQRT2 = "s"


class SolverError(Exception):
    """The solver crashed, is missing, or produced output we cannot read."""


@dataclass
class SolveResult:
    status: str  # "sat" | "unsat" | "timeout" | "unknown"
    model: Dict[str, QSqrt2] = field(default_factory=dict)
    raw: str = ""


# emission


def _rat(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator) if q >= 0 else f"(- {-q.numerator})"
    num = str(abs(q.numerator))
    body = f"(/ {num} {q.denominator})"
    return body if q >= 0 else f"(- {body})"


def qsqrt2_smt(c: QSqrt2) -> str:
    if not c.b:
        return _rat(c.a)
    irr = SQRT2 if c.b == 1 else f"(* {_rat(c.b)} {SQRT2})"
    return irr if not c.a else f"(+ {_rat(c.a)} {irr})"


def _term(coeff: QSqrt2, var: str) -> str:
    if coeff == 1:
        return var
    return f"(* {qsqrt2_smt(coeff)} {var})"


def _sum(lin: Dict[str, QSqrt2]) -> str:
    parts = [_term(lin[v], v) for v in sorted(lin)]
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def emit(sysm: LinearSystem, extra: Sequence[str] = (), objective: bool = False) -> str:
    """Deterministic SMT-LIB2 text for a certificate system."""
    out: List[str] = ["(set-logic QF_NRA)", "(set-option :produce-models true)"]
    names = sorted(set(sysm.variables()))
    for v in names:
        out.append(f"(declare-fun {v} () Real)")
    out.append(f"(declare-fun {SQRT2} () Real)")
    out.append(f"(assert (= (* {SQRT2} {SQRT2}) 2))")
    out.append(f"(assert (> {SQRT2} 0))")
    for v in names:
        out.append(f"(assert (>= {v} 0))")
    for lin, rhs in sysm.rows:
        out.append(f"(assert (= {_sum(lin)} {qsqrt2_smt(rhs)}))")
    for lin in sysm.strict_rows:
        out.append(f"(assert (> {_sum(lin)} 0))")
    out.extend(extra)
    out.append("(check-sat)")
    if sysm.unknowns:
        out.append(f"(get-value ({' '.join(sorted(sysm.unknowns))}))")
    if sysm.multipliers:
        out.append(f"(get-value ({' '.join(sorted(sysm.multipliers))}))")
    return "\n".join(out) + "\n"


# process


def find_solver(path: Optional[str] = None) -> Optional[str]:
    cand = path or os.environ.get("QCOST_SOLVER") or "z3"
    if os.path.sep in cand:
        return cand if os.access(cand, os.X_OK) else None
    return shutil.which(cand)


def solve(smt_text: str, solver_path: Optional[str] = None, timeout: float = 10.0) -> SolveResult:
    exe = find_solver(solver_path)
    if exe is None:
        raise SolverError(f"solver not found: {solver_path or os.environ.get('QCOST_SOLVER') or 'z3'}")
    ms = max(1, int(timeout * 1000))
    try:
        proc = subprocess.run([exe, "-in", "-smt2", f"-t:{ms}"], input=smt_text, capture_output=True,
                              text=True, timeout=timeout + 5)
    except subprocess.TimeoutExpired:
        return SolveResult("timeout")
    except OSError as exc:
        raise SolverError(str(exc)) from exc
    text = proc.stdout.strip()
    first = text.split("\n", 1)[0].strip() if text else ""
    if first == "unsat":
        return SolveResult("unsat", raw=text)
    if first in ("unknown", "timeout"):
        return SolveResult("timeout" if "timeout" in text or "canceled" in text else "unknown", raw=text)
    if first != "sat":
        raise SolverError(f"unexpected solver output: {text[:200]!r} {proc.stderr[:200]!r}")
    model: Dict[str, QSqrt2] = {}
    rest = text[len(first):]
    for block in parse_sexprs(rest):
        if not isinstance(block, list):
            continue
        for pair in block:
            if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                model[pair[0]] = value_of(pair[1])
    return SolveResult("sat", model, text)


# model parsing

SExpr = Union[str, list]
_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_sexprs(text: str) -> List[SExpr]:
    stack: List[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SolverError("unbalanced model output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SolverError("unbalanced model output")
    return stack[0]


def _number(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except ValueError as exc:
        raise SolverError(f"bad number {tok!r}") from exc


def value_of(e: SExpr) -> QSqrt2:
    """Evaluate a model value: rationals, arithmetic over them, quadratic root objects."""
    if isinstance(e, str):
        return QSqrt2(_number(e))
    if not e:
        raise SolverError("empty value")
    head = e[0]
    if head == "root-obj":
        return _root_obj(e[1], int(e[2]))
    args = [value_of(a) for a in e[1:]]
    if head == "-":
        return -args[0] if len(args) == 1 else args[0] - sum(args[1:], QSqrt2(0))
    if head == "+":
        return sum(args, QSqrt2(0))
    if head == "*":
        out = QSqrt2(1)
        for a in args:
            out = out * a
        return out
    if head == "/":
        return args[0] / args[1]
    raise SolverError(f"unsupported model value {e!r}")


def _poly_coeffs(e: SExpr, var: str) -> Dict[int, Fraction]:
    """Coefficients of a univariate polynomial in solver syntax."""
    if isinstance(e, str):
        if e == var:
            return {1: Fraction(1)}
        return {0: _number(e)}
    head, args = e[0], [_poly_coeffs(a, var) for a in e[1:]]
    if head == "^":
        base, k = args[0], int(e[2])
        out = {0: Fraction(1)}
        for _ in range(k):
            out = _pmul(out, base)
        return out
    if head == "+":
        out: Dict[int, Fraction] = {}
        for a in args:
            for d, c in a.items():
                out[d] = out.get(d, 0) + c
        return out
    if head == "-":
        if len(args) == 1:
            return {d: -c for d, c in args[0].items()}
        out = dict(args[0])
        for a in args[1:]:
            for d, c in a.items():
                out[d] = out.get(d, 0) - c
        return out
    if head == "*":
        out = {0: Fraction(1)}
        for a in args:
            out = _pmul(out, a)
        return out
    if head == "/":
        den = args[1].get(0)
        return {d: c / den for d, c in args[0].items()}
    raise SolverError(f"unsupported root polynomial {e!r}")


def _pmul(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return out


def _sqrt_frac(q: Fraction) -> Optional[Fraction]:
    from math import isqrt
    if q < 0:
        return None
    n, d = isqrt(q.numerator), isqrt(q.denominator)
    return Fraction(n, d) if n * n == q.numerator and d * d == q.denominator else None


def _root_obj(poly: SExpr, index: int) -> QSqrt2:
    cs = _poly_coeffs(poly, "x")
    deg = max((d for d, c in cs.items() if c), default=0)
    if deg == 1:
        return QSqrt2(-cs.get(0, 0) / cs[1])
    if deg != 2:
        raise SolverError(f"root of degree {deg} is outside Q(sqrt2)")
    a, b, c = cs[2], cs.get(1, Fraction(0)), cs.get(0, Fraction(0))
    disc = b * b - 4 * a * c
    # disc = 2 r^2 for the root to lie in Q(sqrt2)
    r = _sqrt_frac(disc / 2)
    if r is None:
        raise SolverError("root outside Q(sqrt2)")
    roots = sorted([QSqrt2(-b / (2 * a), -r / (2 * a)), QSqrt2(-b / (2 * a), r / (2 * a))])
    return roots[index - 1]
