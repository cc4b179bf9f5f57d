"""Text grammar for expressions used in configuration files.

    expr    := cond ('?' expr ':' expr)?
    cond    := sum (('<' | '<=' | '>' | '>=') sum)?
    sum     := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' unary)?          right associative, binds tightest
    atom    := number | identifier | call | '(' expr ')'
    call    := ('sqrt' | 'abs') '(' expr ')' | ('min' | 'max') '(' expr ',' expr ')'
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import List, NamedTuple

from .nodes import (
    TRUE,
    Abs,
    Add,
    Compare,
    Const,
    Div,
    Expr,
    Max,
    Min,
    Mul,
    Piecewise,
    Pow,
    Sqrt,
    VariableLayout,
)
from .ops import simplify


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ValueError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|[-+*/^()<>?:,])
    """,
    re.VERBOSE,
)

_FUNCS = {"sqrt": 1, "abs": 1, "min": 2, "max": 2}


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _number(text: str) -> Const:
    if re.fullmatch(r"\d+", text):
        return Const(Fraction(int(text)))
    return Const(float(text))


class _Parser:
    def __init__(self, text: str, layout: VariableLayout):
        self.text = text
        self.layout = layout
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            got = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, got {got!r}", self.tok.offset, self.text)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset, self.text)
        return e

    def expr(self) -> Expr:
        cond = self.cond()
        if self.tok.text == "?":
            self.advance()
            a = self.expr()
            self.expect(":")
            b = self.expr()
            if isinstance(b, Piecewise):
                return Piecewise(((cond, a),) + b.branches)
            return Piecewise(((cond, a), (TRUE, b)))
        return cond

    def cond(self) -> Expr:
        a = self.sum()
        if self.tok.text in ("<", "<=", ">", ">="):
            op = self.advance().text
            b = self.sum()
            return Compare(op, a, b)
        return a

    def sum(self) -> Expr:
        terms = [self.term()]
        while self.tok.text in ("+", "-"):
            op = self.advance().text
            t = self.term()
            terms.append(t if op == "+" else Mul((Const(-1), t)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self) -> Expr:
        e = self.unary()
        factors = [e]
        while self.tok.text in ("*", "/"):
            op = self.advance().text
            rhs = self.unary()
            if op == "*":
                factors.append(rhs)
            else:
                lhs = factors[0] if len(factors) == 1 else Mul(tuple(factors))
                factors = [Div(lhs, rhs)]
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.advance()
            return Mul((Const(-1), self.unary()))
        if self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text == "^":
            tok = self.advance()
            exp = simplify(self.unary())
            if not (isinstance(exp, Const) and isinstance(exp.value, Fraction) and exp.value.denominator == 1):
                raise ExprSyntaxError("exponent must be an integer constant", tok.offset, self.text)
            return Pow(base, int(exp.value))
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return _number(tok.text)
        if tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            self.advance()
            if tok.text in _FUNCS and self.tok.text == "(":
                self.advance()
                args = [self.expr()]
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _FUNCS[tok.text]:
                    raise ExprSyntaxError(
                        f"{tok.text} takes {_FUNCS[tok.text]} argument(s), got {len(args)}", tok.offset, self.text
                    )
                if tok.text == "sqrt":
                    return Sqrt(args[0])
                if tok.text == "abs":
                    return Abs(args[0])
                if tok.text == "min":
                    return Min(*args)
                return Max(*args)
            try:
                return self.layout.lookup(tok.text)
            except KeyError:
                raise UnknownIdentifierError(tok.text, tok.offset) from None
        got = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {got!r}", tok.offset, self.text)


def parse(text: str, layout: VariableLayout) -> Expr:
    """Parse expression text, resolving identifiers against ``layout``."""
    return _Parser(text, layout).parse()
