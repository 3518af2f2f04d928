"""Abstract syntax of IMQ programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

# expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "!"
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * == != < <= > >= && ||
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, BoolLit, Var, Unary, Binary]

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("&&", "||")

# statements


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class InitQubit:
    """q := |0> or q := |+> (removed by desugaring)."""

    qubit: str
    kind: str  # "0" or "+"


@dataclass(frozen=True)
class Measure:
    var: str
    qubit: str


@dataclass(frozen=True)
class Gate:
    gate: str
    qubits: Tuple[str, ...]


@dataclass(frozen=True)
class Consume:
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Stmt"
    second: "Stmt"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    loc: str = ""


@dataclass(frozen=True)
class Call:
    """Macro call, removed by expansion."""

    name: str
    args: Tuple[str, ...]


Stmt = Union[Skip, Assign, InitQubit, Measure, Gate, Consume, Seq, If, While, Call]


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: Tuple[str, ...]
    body: Stmt


@dataclass
class Program:
    decls: Dict[str, str]  # name -> "bool" | "int" | "qubit", in declaration order
    body: Stmt
    macros: Dict[str, MacroDef] = field(default_factory=dict)

    @property
    def qubits(self) -> List[str]:
        return [v for v, t in self.decls.items() if t == "qubit"]

    def qubit_index(self, name: str) -> int:
        """1-based significance position of a qubit."""
        return self.qubits.index(name) + 1

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def __eq__(self, o):
        if not isinstance(o, Program):
            return NotImplemented
        return (list(self.decls.items()) == list(o.decls.items()) and self.body == o.body
                and self.macros == o.macros)


def seq(stmts: List[Stmt]) -> Stmt:
    """Right-nested sequence; the empty list is skip."""
    stmts = [s for s in stmts if not isinstance(s, Skip)] or [Skip()]
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def flatten(s: Stmt) -> List[Stmt]:
    if isinstance(s, Seq):
        return flatten(s.first) + flatten(s.second)
    return [s]


def walk(s: Stmt) -> Iterator[Stmt]:
    yield s
    if isinstance(s, Seq):
        yield from walk(s.first)
        yield from walk(s.second)
    elif isinstance(s, If):
        yield from walk(s.then)
        yield from walk(s.orelse)
    elif isinstance(s, While):
        yield from walk(s.body)


def loops(s: Stmt) -> List[While]:
    return [x for x in walk(s) if isinstance(x, While)]


def expr_vars(e: Expr) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.arg)
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def stmt_vars(s: Stmt) -> set:
    """All variable names mentioned by a statement."""
    out: set = set()
    for x in walk(s):
        if isinstance(x, Assign):
            out |= {x.var} | expr_vars(x.expr)
        elif isinstance(x, Measure):
            out |= {x.var, x.qubit}
        elif isinstance(x, InitQubit):
            out.add(x.qubit)
        elif isinstance(x, Gate):
            out |= set(x.qubits)
        elif isinstance(x, Consume):
            out |= expr_vars(x.expr)
        elif isinstance(x, (If, While)):
            out |= expr_vars(x.cond)
    return out


def assigned_vars(s: Stmt) -> set:
    out: set = set()
    for x in walk(s):
        if isinstance(x, (Assign, Measure)):
            out.add(x.var)
    return out


def find_loop(s: Stmt, loc: str) -> Optional[While]:
    for w in loops(s):
        if w.loc == loc:
            return w
    return None
