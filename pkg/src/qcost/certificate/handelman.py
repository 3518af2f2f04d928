"""Handelman certificates as linear systems over Q(sqrt2).

A goal ``g >= 0`` follows from premises ``p_1 >= 0 .. p_m >= 0`` when
``g = sum_a l_a * p^a`` with ``l_a >= 0`` and ``a`` ranging over exponent
vectors of total degree at most ``n``. Comparing coefficients of program
monomials gives equations that are linear in the multipliers ``l_a`` and in
the template coefficients occurring in ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..arith import Poly, QSqrt2, is_unknown
from ..arith.poly import mono_key
from ..constraints import PolyConstraint

Linear = Dict[str, QSqrt2]

DEFAULT_CAP = 4000


class CapExceeded(Exception):
    """Too many premise products for the requested degree."""


@dataclass
class Certificate:
    constraint: PolyConstraint
    products: List[Tuple[Tuple[int, ...], Poly]]
    multipliers: List[str]
    strict_support: List[str]  # multipliers whose product is positive when all strict premises are


@dataclass
class LinearSystem:
    unknowns: List[str]  # template coefficients
    multipliers: List[str] = field(default_factory=list)
    rows: List[Tuple[Linear, QSqrt2]] = field(default_factory=list)  # sum = rhs
    strict_rows: List[Linear] = field(default_factory=list)  # sum > 0
    certs: List[Certificate] = field(default_factory=list)
    weights: Dict[str, float] = field(default_factory=dict)  # objective weights of unknowns, default 1

    def variables(self) -> List[str]:
        return list(self.unknowns) + list(self.multipliers)

    def stats(self) -> Dict[str, int]:
        return {"unknowns": len(self.unknowns), "multipliers": len(self.multipliers),
                "equations": len(self.rows), "constraints": len(self.certs)}


def linear_form(p: Poly) -> Tuple[Linear, QSqrt2]:
    """Split a polynomial over unknowns into (coefficients, constant)."""
    lin: Linear = {}
    const = QSqrt2(0)
    for mono, c in p.terms.items():
        if not mono:
            const = c
        elif len(mono) == 1 and mono[0][1] == 1:
            lin[mono[0][0]] = c
        else:
            raise ValueError(f"goal is not linear in the unknowns: {p}")
    return lin, const


def product_count(m: int, degree: int) -> int:
    return comb(m + degree, degree)


def premise_products(premises: Sequence[Poly], degree: int,
                     cap: int = DEFAULT_CAP) -> List[Tuple[Tuple[int, ...], Poly]]:
    m = len(premises)
    if product_count(m, degree) > cap:
        raise CapExceeded(f"{product_count(m, degree)} products for {m} premises at degree {degree}")
    out: List[Tuple[Tuple[int, ...], Poly]] = [((), Poly.const(1))]
    memo: Dict[Tuple[int, ...], Poly] = {(): Poly.const(1)}
    for k in range(1, degree + 1):
        for idx in combinations_with_replacement(range(m), k):
            p = memo[idx[:-1]] * premises[idx[-1]]
            memo[idx] = p
            out.append((idx, p))
    return out


def encode(pcs: Sequence[PolyConstraint], unknowns: Sequence[str], degree: int,
           cap: int = DEFAULT_CAP) -> LinearSystem:
    sysm = LinearSystem(sorted(unknowns))
    for ci, pc in enumerate(pcs):
        prem = pc.premises()
        prods = premise_products([p for p, _ in prem], degree, cap)
        names = [f"_l{ci}_{j}" for j in range(len(prods))]
        strict_flags = [s for _, s in prem]
        strict_support = [names[j] for j, (idx, _) in enumerate(prods)
                          if all(strict_flags[i] for i in idx)]
        sysm.certs.append(Certificate(pc, prods, names, strict_support))
        sysm.multipliers += names
        # goal coefficients, grouped by program monomial
        eqs: Dict[tuple, Tuple[Linear, QSqrt2]] = {}
        for mono, coeff in pc.goal.split(lambda v: not is_unknown(v)).items():
            lin, const = linear_form(coeff)
            eqs[mono] = (dict(lin), -const)
        for name, (_, p) in zip(names, prods):
            for mono, c in p.terms.items():
                lin, rhs = eqs.get(mono, ({}, QSqrt2(0)))
                lin[name] = lin.get(name, QSqrt2(0)) - c
                eqs[mono] = (lin, rhs)
        for mono in sorted(eqs, key=mono_key):
            lin, rhs = eqs[mono]
            lin = {k: v for k, v in lin.items() if v}
            if not lin:
                if rhs:
                    # 0 = nonzero: unsatisfiable row, kept so the solver reports it
                    sysm.rows.append(({}, rhs))
                continue
            sysm.rows.append((lin, rhs))
        if pc.strict_goal:
            sysm.strict_rows.append({n: QSqrt2(1) for n in strict_support})
    return sysm


# exact checking


def verify(sysm: LinearSystem, model: Mapping[str, QSqrt2]) -> Optional[str]:
    """None when the model is an exact certificate for every constraint, else a reason."""
    for v in sysm.unknowns:
        if model.get(v, QSqrt2(0)) < 0:
            return f"negative coefficient {v}"
    for cert in sysm.certs:
        pc = cert.constraint
        total = Poly()
        for name, (_, p) in zip(cert.multipliers, cert.products):
            lam = model.get(name, QSqrt2(0))
            if lam < 0:
                return f"negative multiplier {name}"
            if lam:
                total = total + p.scale(lam)
        goal = pc.goal.subs({v: Poly.const(model.get(v, QSqrt2(0))) for v in pc.goal.vars() if is_unknown(v)})
        if not (total - goal).is_zero():
            return f"certificate mismatch for {pc.origin}: {goal} >= 0"
        if pc.strict_goal and not any(model.get(n, QSqrt2(0)) > 0 for n in cert.strict_support):
            return f"positivity not witnessed for {pc.goal}"
    return None
