"""Render expressions in the parser's grammar (fully parenthesised)."""
from __future__ import annotations

from fractions import Fraction

from .nodes import (
    Abs,
    Add,
    BoolConst,
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
    Var,
)


def _const(value) -> str:
    if isinstance(value, Fraction) and max(abs(value.numerator), value.denominator) < 2**53:
        if value.denominator == 1:
            s = str(value.numerator)
        else:
            s = f"{value.numerator}/{value.denominator}"
        return f"({s})" if value < 0 or value.denominator != 1 else s
    r = repr(float(value))
    if r in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot print non-finite constant {r}")
    if "." not in r and "e" not in r:
        r += ".0"
    return f"({r})" if r.startswith("-") else r


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        return _const(e.value)
    if isinstance(e, BoolConst):
        # only reachable for a bare condition; 1 > 0 round-trips as true
        return "(1 > 0)" if e.value else "(0 > 1)"
    if isinstance(e, Var):
        return e.name or f"{e.kind}{e.index}"
    if isinstance(e, Add):
        return "(" + " + ".join(to_string(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "(" + " * ".join(to_string(f) for f in e.factors) + ")"
    if isinstance(e, Div):
        return f"({to_string(e.num)} / {to_string(e.den)})"
    if isinstance(e, Pow):
        exp = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        return f"({to_string(e.base)}^{exp})"
    if isinstance(e, Sqrt):
        return f"sqrt({to_string(e.arg)})"
    if isinstance(e, Abs):
        return f"abs({to_string(e.arg)})"
    if isinstance(e, Min):
        return f"min({to_string(e.a)}, {to_string(e.b)})"
    if isinstance(e, Max):
        return f"max({to_string(e.a)}, {to_string(e.b)})"
    if isinstance(e, Compare):
        return f"({to_string(e.a)} {e.op} {to_string(e.b)})"
    if isinstance(e, Piecewise):
        out = to_string(e.branches[-1][1])
        for cond, val in reversed(e.branches[:-1]):
            out = f"({to_string(cond)} ? {to_string(val)} : {out})"
        return out
    raise TypeError(f"unknown node {type(e).__name__}")
