"""Text syntax for schemata and constraints.

    schema NAME { params: n; constraint: n >= 0; pattern: P }

Patterns use ``true false p[e,..] ~ /\\ \\/ -> <-> xor`` and iterations
``And i in [1..n]: BODY`` / ``Or i in {C}: BODY``.  An iteration body is a
unary pattern, so compound bodies need parentheses.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import linarith as la
from .linarith import Constraint, LinearExpr
from .schema import (
    BOTTOM,
    TOP,
    Bottom,
    Conj,
    Disj,
    Iff,
    Implies,
    Iter,
    Lit,
    Neg,
    Pattern,
    Schema,
    Top,
    Xor,
    desugar_to_nnf,
    pattern_free_vars,
    unique_binders,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*|//[^\n]*)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><->|->|/\\|\\/|<=|>=|!=|\.\.|[=<>~()\[\]{},;:.+\-*|])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Tok]:
    toks: List[Tok] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Tok(kind, m.group(), line, pos - line_start + 1))
        for nl in re.finditer("\n", m.group()):
            line += 1
            line_start = pos + nl.end()
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


_RELS = {"=", "!=", "<", "<=", ">", ">="}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def error(self, msg: str) -> ParseError:
        t = self.tok
        return ParseError(f"{msg}, found {t.text or 'end of input'!r}", t.line, t.col)

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "id":
            raise self.error("expected an identifier")
        self.i += 1
        return t.text

    # expressions
    def expr(self) -> LinearExpr:
        if self.at("-"):
            self.i += 1
            e = -self.term()
        else:
            e = self.term()
        while self.at("+", "-"):
            op = self.tok.text
            self.i += 1
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self) -> LinearExpr:
        e = self.factor()
        while self.at("*"):
            self.i += 1
            f = self.factor()
            if e.is_ground():
                e = f * e.constant
            elif f.is_ground():
                e = e * f.constant
            else:
                raise self.error("non-linear product")
        return e

    def factor(self) -> LinearExpr:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return la.const(int(t.text))
        if self.at("-"):
            self.i += 1
            return -self.factor()
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "id" and t.text == "s" and self.peek().text == "(":
            self.i += 2
            e = self.expr()
            self.expect(")")
            return e + 1
        if t.kind == "id" and t.text not in _KEYWORDS:
            self.i += 1
            return la.var(t.text)
        raise self.error("expected an expression")

    # constraints
    def constraint(self) -> Constraint:
        parts = [self.cconj()]
        while self.at("\\/"):
            self.i += 1
            parts.append(self.cconj())
        return la.disj(*parts) if len(parts) > 1 else parts[0]

    def cconj(self) -> Constraint:
        parts = [self.cunary()]
        while self.at("/\\"):
            self.i += 1
            parts.append(self.cunary())
        return la.conj(*parts) if len(parts) > 1 else parts[0]

    def cunary(self) -> Constraint:
        if self.at("~"):
            self.i += 1
            return la.neg(self.cunary())
        if self.at("exists", "forall"):
            q = self.tok.text
            self.i += 1
            x = self.ident()
            self.expect(".")
            body = self.constraint()
            return la.Exists(x, body) if q == "exists" else la.Forall(x, body)
        if self.at("true"):
            self.i += 1
            return la.TRUE
        if self.at("false"):
            self.i += 1
            return la.FALSE
        if self.at("("):
            save = self.i
            try:
                self.i += 1
                c = self.constraint()
                self.expect(")")
                if not (self.tok.text in _RELS or self.at("+", "-", "*")):
                    return c
            except ParseError:
                pass
            self.i = save
        if self.tok.kind == "int" and self.peek().text == "|":
            m = int(self.tok.text)
            self.i += 2
            return la.divides(m, self.expr())
        return self.comparison()

    def comparison(self) -> Constraint:
        left = self.expr()
        if self.tok.text not in _RELS or self.tok.kind != "op":
            raise self.error("expected a relation")
        parts = []
        while self.tok.kind == "op" and self.tok.text in _RELS:
            rel = self.tok.text
            self.i += 1
            right = self.expr()
            parts.append(la.atom(left, rel, right))
            left = right
        return la.conj(*parts)

    # patterns
    def pattern(self) -> Pattern:
        p = self.p_imp()
        while self.at("<->"):
            self.i += 1
            p = Iff(p, self.p_imp())
        return p

    def p_imp(self) -> Pattern:
        p = self.p_xor()
        if self.at("->"):
            self.i += 1
            return Implies(p, self.p_imp())
        return p

    def p_xor(self) -> Pattern:
        p = self.p_or()
        while self.at("xor"):
            self.i += 1
            p = Xor(p, self.p_or())
        return p

    def p_or(self) -> Pattern:
        parts = [self.p_and()]
        while self.at("\\/"):
            self.i += 1
            parts.append(self.p_and())
        return Disj(tuple(parts)) if len(parts) > 1 else parts[0]

    def p_and(self) -> Pattern:
        parts = [self.p_unary()]
        while self.at("/\\"):
            self.i += 1
            parts.append(self.p_unary())
        return Conj(tuple(parts)) if len(parts) > 1 else parts[0]

    def p_unary(self) -> Pattern:
        if self.at("~"):
            self.i += 1
            return Neg(self.p_unary())
        if self.at("And", "Or"):
            kind = "and" if self.tok.text == "And" else "or"
            self.i += 1
            x = self.ident()
            self.expect("in")
            dom = self.domain(x)
            self.expect(":")
            return Iter(kind, x, dom, self.p_unary())
        if self.at("true"):
            self.i += 1
            return TOP
        if self.at("false"):
            self.i += 1
            return BOTTOM
        if self.at("("):
            self.i += 1
            p = self.pattern()
            self.expect(")")
            return p
        t = self.tok
        if t.kind == "id" and t.text not in _KEYWORDS:
            self.i += 1
            idx: Tuple[LinearExpr, ...] = ()
            if self.at("["):
                self.i += 1
                items = [self.expr()]
                while self.at(","):
                    self.i += 1
                    items.append(self.expr())
                self.expect("]")
                idx = tuple(items)
            return Lit(t.text, idx, True)
        raise self.error("expected a pattern")

    def domain(self, x: str) -> Constraint:
        if self.at("["):
            self.i += 1
            lo = self.expr()
            self.expect("..")
            hi = self.expr()
            self.expect("]")
            return la.frame(x, lo, hi)
        if self.at("{"):
            self.i += 1
            c = self.constraint()
            self.expect("}")
            return c
        raise self.error("expected a domain")

    # problem file
    def problem(self) -> Schema:
        self.expect("schema")
        name = self.ident()
        self.expect("{")
        params: List[str] = []
        constraint: Constraint = la.TRUE
        pattern: Optional[Pattern] = None
        while not self.at("}"):
            key = self.ident()
            self.expect(":")
            if key == "params":
                if self.tok.kind == "id":
                    params.append(self.ident())
                    while self.at(","):
                        self.i += 1
                        params.append(self.ident())
            elif key == "constraint":
                constraint = self.constraint()
            elif key == "pattern":
                pattern = self.pattern()
            else:
                raise ParseError(f"unknown section {key!r}", self.tok.line, self.tok.col)
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        if self.tok.kind != "eof":
            raise self.error("trailing input")
        if pattern is None:
            raise ParseError("missing pattern section")
        nnf = desugar_to_nnf(pattern)
        nnf = unique_binders(nnf, set(params) | pattern_free_vars(nnf))
        return Schema(nnf, constraint, tuple(params), name)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("trailing input")


_KEYWORDS = {"And", "Or", "in", "true", "false", "xor", "exists", "forall", "schema"}


def parse_problem(text: str) -> Schema:
    return Parser(text).problem()


def parse_pattern(text: str, nnf: bool = True) -> Pattern:
    p = Parser(text)
    r = p.pattern()
    p.finish()
    return desugar_to_nnf(r) if nnf else r


def parse_constraint(text: str) -> Constraint:
    p = Parser(text)
    r = p.constraint()
    p.finish()
    return r


def parse_expr(text: str) -> LinearExpr:
    p = Parser(text)
    r = p.expr()
    p.finish()
    return r


# ---------------------------------------------------------------------------
# Printing


def format_expr(e: LinearExpr) -> str:
    return str(e)


def format_domain(x: str, dom: Constraint) -> str:
    fb = la.frame_bounds(dom, x)
    if fb is not None:
        return f"[{fb[0]}..{fb[1]}]"
    return "{" + la.format_constraint(dom) + "}"


def format_pattern(p: Pattern) -> str:
    if isinstance(p, Top):
        return "true"
    if isinstance(p, Bottom):
        return "false"
    if isinstance(p, Lit):
        s = p.symbol
        if p.indices:
            s += "[" + ", ".join(map(str, p.indices)) + "]"
        return s if p.positive else "~" + s
    if isinstance(p, Conj):
        return " /\\ ".join(_wrap(a) for a in p.args)
    if isinstance(p, Disj):
        return " \\/ ".join(_wrap(a) for a in p.args)
    if isinstance(p, Iter):
        q = "And" if p.kind == "and" else "Or"
        return f"{q} {p.var} in {format_domain(p.var, p.domain)}: {_wrap(p.body)}"
    if isinstance(p, Neg):
        return "~" + _wrap(p.arg)
    if isinstance(p, Implies):
        return f"{_wrap(p.left)} -> {_wrap(p.right)}"
    if isinstance(p, Iff):
        return f"{_wrap(p.left)} <-> {_wrap(p.right)}"
    if isinstance(p, Xor):
        return f"{_wrap(p.left)} xor {_wrap(p.right)}"
    raise TypeError(p)


def _wrap(p: Pattern) -> str:
    s = format_pattern(p)
    if isinstance(p, (Top, Bottom, Lit, Iter, Neg)):
        return s
    return f"({s})"


def format_schema(s: Schema) -> str:
    name = s.name or "S"
    return (
        f"schema {name} {{\n"
        f"  params: {', '.join(s.parameters)};\n"
        f"  constraint: {la.format_constraint(s.constraint)};\n"
        f"  pattern: {format_pattern(s.pattern)}\n"
        "}\n"
    )
