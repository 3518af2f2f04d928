"""Recursive-descent parser for the IMQ concrete syntax.

    var x : bool;  var q1, q2 : qubit;  var k : int;
    def trial(t, r) { ... }
    x := e;  q := |0>;  q := |+>;  x <- meas(q);  q1, q2 *= CNOT;
    consume(e);  skip;  if b { ... } else { ... };  while b { ... };  trial(q, x);

Statements are separated by ';' which may be omitted after a closing brace.
Comments run from '//' to the end of the line.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

from ..density import GATES
from .ast import (
    Assign, Binary, BoolLit, Call, Consume, Expr, Gate, If, InitQubit, IntLit, MacroDef,
    Measure, Program, Skip, Stmt, Unary, Var, While, seq,
)
from .errors import ParseError, UnsupportedFeature

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<ket>\|[0+]>)
  | (?P<op>:=|<-|\*=|==|!=|<=|>=|&&|\|\||[-+*<>!(){};,:\[\]=])
  | (?P<num>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.X,
)

KEYWORDS = {"var", "def", "if", "else", "while", "skip", "consume", "meas", "true", "false",
            "bool", "int", "qubit"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.line}:{self.col}"


def tokenize(src: str) -> List[Token]:
    out: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "id" and text in KEYWORDS:
            out.append(Token("kw", text, line, col))
        else:
            out.append(Token(kind, text, line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw", "ket") and t.text == text

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}' but found '{self.tok.text or 'end of input'}'")
        t = self.tok
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            self.fail(f"expected an identifier but found '{t.text or 'end of input'}'")
        self.i += 1
        return t.text

    def fail(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    # program
    def program(self) -> Program:
        decls = {}
        macros = {}
        while self.at("var") or self.at("def"):
            if self.at("var"):
                for name, ty, tok in self.decl():
                    if name in decls:
                        self.fail(f"variable '{name}' declared twice", tok)
                    decls[name] = ty
            else:
                m = self.macro()
                if m.name in macros:
                    self.fail(f"macro '{m.name}' defined twice")
                macros[m.name] = m
        body = self.stmts(top=True)
        if self.tok.kind != "eof":
            self.fail(f"unexpected '{self.tok.text}'")
        return Program(decls, body, macros)

    def decl(self) -> List[Tuple[str, str, Token]]:
        self.eat("var")
        names = []
        while True:
            t = self.tok
            names.append((self.ident(), t))
            if not self.accept(","):
                break
        self.eat(":")
        t = self.tok
        if t.kind != "kw" or t.text not in ("bool", "int", "qubit"):
            self.fail("expected a type: bool, int or qubit")
        self.i += 1
        if t.text == "qubit" and self.at("["):
            raise UnsupportedFeature("parametrised qubit registers are not supported", t.line, t.col)
        self.accept(";")
        return [(n, t.text, tok) for n, tok in names]

    def macro(self) -> MacroDef:
        self.eat("def")
        name = self.ident()
        self.eat("(")
        params = []
        if not self.at(")"):
            params.append(self.ident())
            while self.accept(","):
                params.append(self.ident())
        self.eat(")")
        if len(set(params)) != len(params):
            self.fail(f"repeated parameter in macro '{name}'")
        body = self.block()
        self.accept(";")
        return MacroDef(name, tuple(params), body)

    def block(self) -> Stmt:
        self.eat("{")
        body = self.stmts(top=False)
        self.eat("}")
        return body

    def stmts(self, top: bool) -> Stmt:
        out: List[Stmt] = []
        while not (self.tok.kind == "eof" or (not top and self.at("}"))):
            if self.accept(";"):
                continue
            s, braced = self.stmt()
            out.append(s)
            if self.accept(";"):
                continue
            if braced or self.tok.kind == "eof" or (not top and self.at("}")):
                continue
            self.fail(f"expected ';' but found '{self.tok.text}'")
        return seq(out) if out else Skip()

    def stmt(self) -> Tuple[Stmt, bool]:
        t = self.tok
        if self.accept("skip"):
            return Skip(), False
        if self.accept("consume"):
            return Consume(self.expr()), False
        if self.accept("if"):
            return self.if_rest(), True
        if self.accept("while"):
            cond = self.expr()
            return While(cond, self.block()), True
        if t.kind != "id":
            self.fail(f"expected a statement but found '{t.text or 'end of input'}'")
        name = self.ident()
        if self.accept(":="):
            if self.tok.kind == "ket":
                k = self.tok.text[1]
                self.i += 1
                return InitQubit(name, k), False
            return Assign(name, self.expr()), False
        if self.accept("<-"):
            self.eat("meas")
            self.eat("(")
            q = self.ident()
            self.eat(")")
            return Measure(name, q), False
        if self.at(",") or self.at("*="):
            qs = [name]
            while self.accept(","):
                qs.append(self.ident())
            self.eat("*=")
            gt = self.tok
            if gt.kind != "id":
                self.fail("expected a gate name")
            self.i += 1
            if gt.text not in GATES or self.at("("):
                raise UnsupportedFeature(f"unsupported gate '{gt.text}'", gt.line, gt.col)
            return Gate(gt.text, tuple(qs)), False
        if self.accept("("):
            args = []
            if not self.at(")"):
                args.append(self.ident())
                while self.accept(","):
                    args.append(self.ident())
            self.eat(")")
            return Call(name, tuple(args)), False
        self.fail(f"expected ':=', '<-', '*=' or a call after '{name}'")

    def if_rest(self) -> Stmt:
        cond = self.expr()
        then = self.block()
        orelse: Stmt = Skip()
        if self.accept("else"):
            if self.accept("if"):
                orelse = self.if_rest()
            else:
                orelse = self.block()
        return If(cond, then, orelse)

    # expressions, loosest first
    def expr(self) -> Expr:
        e = self.conj()
        while self.accept("||"):
            e = Binary("||", e, self.conj())
        return e

    def conj(self) -> Expr:
        e = self.neg()
        while self.accept("&&"):
            e = Binary("&&", e, self.neg())
        return e

    def neg(self) -> Expr:
        if self.accept("!"):
            return Unary("!", self.neg())
        return self.cmp()

    def cmp(self) -> Expr:
        e = self.sum()
        for op in ("==", "!=", "<=", ">=", "<", ">", "="):
            if self.at(op):
                self.i += 1
                return Binary("==" if op == "=" else op, e, self.sum())
        return e

    def sum(self) -> Expr:
        e = self.prod()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = Binary(op, e, self.prod())
        return e

    def prod(self) -> Expr:
        e = self.unary()
        while self.accept("*"):
            e = Binary("*", e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Unary("-", self.unary())
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return IntLit(int(t.text))
        if self.accept("true"):
            return BoolLit(True)
        if self.accept("false"):
            return BoolLit(False)
        if t.kind == "id":
            self.i += 1
            return Var(t.text)
        if self.accept("("):
            e = self.expr()
            self.eat(")")
            return e
        self.fail(f"expected an expression but found '{t.text or 'end of input'}'")


def parse(src: str) -> Program:
    return Parser(src).program()


def parse_expr(src: str) -> Expr:
    p = Parser(src)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail(f"unexpected '{p.tok.text}'")
    return e
