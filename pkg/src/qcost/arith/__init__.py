"""Exact arithmetic: Q(sqrt 2) scalars, polynomials and rational functions."""

from .qsqrt2 import QSqrt2, CplxQ, SQRT2, HALF_SQRT2, render
from .poly import Poly, Monomial, density_var, parse_density_var, is_density_var, is_unknown, var_rank, poly_text
from .ratfun import RatFun, subs_poly

__all__ = [
    "QSqrt2", "CplxQ", "SQRT2", "HALF_SQRT2", "render",
    "Poly", "Monomial", "density_var", "parse_density_var", "is_density_var", "is_unknown",
    "var_rank", "poly_text", "RatFun", "subs_poly",
]
