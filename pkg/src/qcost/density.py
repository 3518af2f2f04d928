"""Gate table and symbolic density matrices.

Qubits are numbered from 1 in declaration order and qubit 1 is the most
significant bit of a computational-basis index. Basis indices are 1-based, so
for two qubits the order is 00, 01, 10, 11 = indices 1..4.

The symbolic input state of n qubits has d_i on the diagonal and a_ij + i*b_ij
above it (i < j). Every gate or measurement is summarised by an update mapping
from these variables to expressions over the same variables.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .arith import CplxQ, HALF_SQRT2, Poly, QSqrt2, RatFun, density_var

MAX_QUBITS = 6

_h = HALF_SQRT2
_0 = CplxQ(0)
_1 = CplxQ(1)
_i = CplxQ(0, 1)


def _m(rows):
    return tuple(tuple(CplxQ.coerce(x) for x in r) for r in rows)


def _perm(n_bits, f):
    dim = 1 << n_bits
    return tuple(tuple(_1 if f(c) == r else _0 for c in range(dim)) for r in range(dim))


_w = CplxQ(_h, _h)  # exp(i pi / 4)

GATES: Dict[str, Tuple[Tuple[CplxQ, ...], ...]] = {
    "X": _m([[0, 1], [1, 0]]),
    "Y": _m([[0, CplxQ(0, -1)], [_i, 0]]),
    "Z": _m([[1, 0], [0, -1]]),
    "H": _m([[_h, _h], [_h, -_h]]),
    "S": _m([[1, 0], [0, _i]]),
    "Sdg": _m([[1, 0], [0, CplxQ(0, -1)]]),
    "T": _m([[1, 0], [0, _w]]),
    "Tdg": _m([[1, 0], [0, _w.conj()]]),
    "CNOT": _perm(2, lambda c: c ^ 1 if c & 2 else c),
    "CZ": _m([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]),
    "CCNOT": _perm(3, lambda c: c ^ 1 if (c & 6) == 6 else c),
}

GATE_ARITY = {name: len(m).bit_length() - 1 for name, m in GATES.items()}


def _check_unitary(m) -> bool:
    dim = len(m)
    for r in range(dim):
        for c in range(dim):
            s = _0
            for k in range(dim):
                s = s + m[r][k] * m[c][k].conj()
            if s != (_1 if r == c else _0):
                return False
    return True


for _name, _mat in GATES.items():
    assert _check_unitary(_mat), _name


def bit(index0: int, qubit: int, n: int) -> int:
    """Bit of qubit (1-based) in a 0-based basis index."""
    return (index0 >> (n - qubit)) & 1


@lru_cache(maxsize=None)
def lift(gate: str, targets: Tuple[int, ...], n: int) -> Tuple[Tuple[Tuple[int, CplxQ], ...], ...]:
    """Sparse rows of the gate embedded in n qubits.

    Row y (0-based) lists (x, U[y][x]) for non-zero entries. Targets are
    1-based qubit numbers in significance order of the gate's own indices.
    """
    if gate not in GATES:
        raise KeyError(f"unknown gate {gate}")
    u = GATES[gate]
    k = GATE_ARITY[gate]
    if len(targets) != k:
        raise ValueError(f"gate {gate} takes {k} qubits, got {len(targets)}")
    if len(set(targets)) != k:
        raise ValueError("gate targets must be distinct")
    if any(not 1 <= t <= n for t in targets):
        raise ValueError("gate target out of range")
    dim = 1 << n
    rows: List[List[Tuple[int, CplxQ]]] = [[] for _ in range(dim)]
    for x in range(dim):
        lx = 0
        for t in targets:
            lx = (lx << 1) | bit(x, t, n)
        base = x
        for t in targets:
            base &= ~(1 << (n - t))
        for ly in range(1 << k):
            c = u[ly][lx]
            if not c:
                continue
            y = base
            for r, t in enumerate(targets):
                if (ly >> (k - 1 - r)) & 1:
                    y |= 1 << (n - t)
            rows[y].append((x, c))
    return tuple(tuple(r) for r in rows)


# symbolic matrices: {(i, j): (re, im)} for 1-based i <= j, values RatFun
SymMatrix = Dict[Tuple[int, int], Tuple[RatFun, RatFun]]


@lru_cache(maxsize=None)
def symbolic_input(n: int) -> SymMatrix:
    if not 0 <= n <= MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits are supported")
    dim = 1 << n
    out: SymMatrix = {}
    for i in range(1, dim + 1):
        out[(i, i)] = (RatFun.var(density_var("d", i)), RatFun.const(0))
        for j in range(i + 1, dim + 1):
            out[(i, j)] = (RatFun.var(density_var("a", i, j)), RatFun.var(density_var("b", i, j)))
    return out


def entry(rho: SymMatrix, i: int, j: int) -> Tuple[RatFun, RatFun]:
    if i <= j:
        return rho[(i, j)]
    re, im = rho[(j, i)]
    return re, -im


def _cmul(c: CplxQ, re: RatFun, im: RatFun) -> Tuple[RatFun, RatFun]:
    r = re.scale(c.re) - im.scale(c.im) if c.im else re.scale(c.re)
    m = re.scale(c.im) + im.scale(c.re) if c.im else im.scale(c.re)
    return r, m


def apply_gate(gate: str, targets: Sequence[int], rho: SymMatrix, n: int) -> SymMatrix:
    """U rho U^dagger for the lifted gate."""
    rows = lift(gate, tuple(targets), n)
    dim = 1 << n
    zero = RatFun.const(0)
    out: SymMatrix = {}
    for i in range(dim):
        for j in range(i, dim):
            # coefficients U[i,k] * conj(U[j,l]) are combined before touching rho
            coeff: Dict[Tuple[int, int], CplxQ] = {}
            for k, u in rows[i]:
                for l, w in rows[j]:
                    c = u * w.conj()
                    coeff[(k, l)] = coeff[(k, l)] + c if (k, l) in coeff else c
            re, im = zero, zero
            for (k, l), c in coeff.items():
                if c.re or c.im:
                    tr, ti = _cmul(c, *entry(rho, k + 1, l + 1))
                    re, im = re + tr, im + ti
            out[(i + 1, j + 1)] = (re, im)
    return out


def _div(x: RatFun, p: RatFun) -> RatFun:
    # a single term never has a sum of several terms as a factor
    if x.is_poly() and p.is_poly() and len(x.num.terms) == 1 and len(p.num.terms) > 1:
        c, g = p.num.normalize_positive()
        return RatFun(x.num.scale(c.inverse()), ((g, 1),), _canonical=True)
    return x / p


def measure_projection(qubit: int, outcome: int, rho: SymMatrix, n: int) -> Tuple[RatFun, SymMatrix]:
    """(p_k, M rho M / p_k) for the projector on ``qubit`` being ``outcome``."""
    dim = 1 << n
    keep = [bit(x, qubit, n) == outcome for x in range(dim)]
    p = RatFun.const(0)
    for x in range(dim):
        if keep[x]:
            p = p + rho[(x + 1, x + 1)][0]
    zero = RatFun.const(0)
    out: SymMatrix = {}
    for i in range(dim):
        for j in range(i, dim):
            if keep[i] and keep[j]:
                re, im = rho[(i + 1, j + 1)]
                out[(i + 1, j + 1)] = (_div(re, p), _div(im, p))
            else:
                out[(i + 1, j + 1)] = (zero, zero)
    return p, out


def update_mapping(rho_new: SymMatrix, n: int) -> Dict[str, RatFun]:
    """Variable substitution taking the input state to ``rho_new``."""
    dim = 1 << n
    out: Dict[str, RatFun] = {}
    for i in range(1, dim + 1):
        out[density_var("d", i)] = rho_new[(i, i)][0]
        for j in range(i + 1, dim + 1):
            re, im = rho_new[(i, j)]
            out[density_var("a", i, j)] = re
            out[density_var("b", i, j)] = im
    return out


@lru_cache(maxsize=None)
def gate_mapping(gate: str, targets: Tuple[int, ...], n: int) -> Dict[str, RatFun]:
    return update_mapping(apply_gate(gate, targets, symbolic_input(n), n), n)


@lru_cache(maxsize=None)
def measure_mapping(qubit: int, outcome: int, n: int) -> Tuple[RatFun, Dict[str, RatFun]]:
    p, rho = measure_projection(qubit, outcome, symbolic_input(n), n)
    return p, update_mapping(rho, n)


def density_vars(n: int) -> List[str]:
    dim = 1 << n
    out = [density_var("d", i) for i in range(1, dim + 1)]
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            out.append(density_var("a", i, j))
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            out.append(density_var("b", i, j))
    return out


def trace_poly(n: int) -> Poly:
    out = Poly()
    for i in range(1, (1 << n) + 1):
        out = out + Poly.var(density_var("d", i))
    return out


# numeric side, used by the oracle and by tests


@lru_cache(maxsize=None)
def gate_matrix(gate: str) -> np.ndarray:
    return np.array([[complex(c) for c in row] for row in GATES[gate]], dtype=complex)


@lru_cache(maxsize=None)
def lifted_matrix(gate: str, targets: Tuple[int, ...], n: int) -> np.ndarray:
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for y, row in enumerate(lift(gate, targets, n)):
        for x, c in row:
            m[y, x] = complex(c)
    m.setflags(write=False)
    return m


def state_valuation(rho: np.ndarray) -> Dict[str, float]:
    """Values of the density variables for a numeric density matrix."""
    dim = rho.shape[0]
    env: Dict[str, float] = {}
    for i in range(dim):
        env[density_var("d", i + 1)] = float(rho[i, i].real)
        for j in range(i + 1, dim):
            env[density_var("a", i + 1, j + 1)] = float(rho[i, j].real)
            env[density_var("b", i + 1, j + 1)] = float(rho[i, j].imag)
    return env


def rational_valuation(rho_re, rho_im) -> Dict[str, Fraction]:
    """Exact valuation from matrices of Fractions (real and imaginary parts)."""
    dim = len(rho_re)
    env: Dict[str, Fraction] = {}
    for i in range(dim):
        env[density_var("d", i + 1)] = Fraction(rho_re[i][i])
        for j in range(i + 1, dim):
            env[density_var("a", i + 1, j + 1)] = Fraction(rho_re[i][j])
            env[density_var("b", i + 1, j + 1)] = Fraction(rho_im[i][j])
    return env


def sample_density(n: int, rng: np.random.Generator) -> np.ndarray:
    """rho = A A^dagger / tr(A A^dagger) for a complex Gaussian A."""
    dim = 1 << n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


