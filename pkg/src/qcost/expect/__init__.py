"""Expectation core: guards, cost expressions and expectation terms."""

from . import formula
from .cost import CostExpr, Summand, cost_text
from .formula import Atom, BVar, Formula, FALSE, TRUE, atom, bvar, conj, disj, iff, neg
from .terms import (
    SymState, TCharge, TCond, TConsume, TCost, TFun, TMeasure, Term, charge, close, cond, consume, measure,
    subs, term_text,
)

__all__ = [
    "formula", "CostExpr", "Summand", "cost_text", "Atom", "BVar", "Formula", "FALSE", "TRUE",
    "atom", "bvar", "conj", "disj", "iff", "neg", "SymState", "TCharge", "TCond", "TConsume", "TCost",
    "TFun", "TMeasure", "Term", "charge", "close", "cond", "consume", "measure", "subs", "term_text",
]
