"""Templates, Handelman encoding, SMT interface and exact certificate search."""

from .handelman import CapExceeded, LinearSystem, encode, verify
from .solve import Outcome, solve_system
from .smt import SolveResult, SolverError, emit, find_solver, solve  # after .solve, which shadows the name
from .templates import MAX_LEVEL, Template, template_gen

__all__ = [
    "CapExceeded", "LinearSystem", "encode", "verify", "SolveResult", "SolverError", "emit",
    "find_solver", "solve", "Outcome", "solve_system", "MAX_LEVEL", "Template", "template_gen",
]
