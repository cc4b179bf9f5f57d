"""Symbolic manipulation: simplification, differentiation, substitution."""
from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Dict, Mapping, Sequence

import numpy as np

from .nodes import (
    FALSE,
    TRUE,
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
    as_expr,
    free_vars,
)

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _is_const(e, value=None) -> bool:
    if not isinstance(e, Const):
        return False
    return value is None or e.value == value


def _num(value):
    """Fraction stays exact; anything else becomes an IEEE double."""
    return value if isinstance(value, Fraction) else np.float64(value)


def _fold(value) -> Const:
    if isinstance(value, Fraction):
        return Const(value)
    return Const(float(value))


def _fold_binary(op, a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        if op == "+":
            return a + b
        if op == "*":
            return a * b
        if b != 0:
            return a / b
    fa, fb = np.float64(float(a)), np.float64(float(b))
    with np.errstate(all="ignore"):
        if op == "+":
            return float(fa + fb)
        if op == "*":
            return float(fa * fb)
        return float(fa / fb)


def _cmp(op, a, b) -> bool:
    a, b = _num(a), _num(b)
    if op == "<":
        return bool(a < b)
    if op == "<=":
        return bool(a <= b)
    if op == ">":
        return bool(a > b)
    return bool(a >= b)


def simplify(e: Expr) -> Expr:
    """Constant folding and identity rewrites; preserves evaluation semantics."""
    return _Simplifier().run(e)


class _Simplifier:
    def __init__(self):
        self.memo: Dict[int, Expr] = {}

    def run(self, e: Expr) -> Expr:
        key = id(e)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out = self._simplify(e)
        self.memo[key] = out
        return out

    def _simplify(self, e):
        if isinstance(e, (Const, BoolConst, Var)):
            return e
        if isinstance(e, Add):
            return self._add(e)
        if isinstance(e, Mul):
            return self._mul(e)
        if isinstance(e, Div):
            num, den = self.run(e.num), self.run(e.den)
            if _is_const(den, 1):
                return num
            if isinstance(num, Const) and isinstance(den, Const):
                return _fold(_fold_binary("/", num.value, den.value))
            if _is_const(num, 0):
                return ZERO
            return Div(num, den)
        if isinstance(e, Pow):
            base = self.run(e.base)
            if e.exp == 0:
                return ONE
            if e.exp == 1:
                return base
            if isinstance(base, Const):
                v = base.value
                if isinstance(v, Fraction) and not (v == 0 and e.exp < 0):
                    return Const(v**e.exp)
                with np.errstate(all="ignore"):
                    return Const(float(np.power(np.float64(float(v)), float(e.exp))))
            return Pow(base, e.exp)
        if isinstance(e, Sqrt):
            arg = self.run(e.arg)
            if isinstance(arg, Const):
                v = arg.value
                if isinstance(v, Fraction) and v >= 0:
                    n, d = isqrt(v.numerator), isqrt(v.denominator)
                    if n * n == v.numerator and d * d == v.denominator:
                        return Const(Fraction(n, d))
                with np.errstate(all="ignore"):
                    return Const(float(np.sqrt(np.float64(float(v)))))
            return Sqrt(arg)
        if isinstance(e, Abs):
            arg = self.run(e.arg)
            if isinstance(arg, Const):
                return Const(abs(arg.value))
            return Abs(arg)
        if isinstance(e, (Min, Max)):
            a, b = self.run(e.a), self.run(e.b)
            if isinstance(a, Const) and isinstance(b, Const):
                fn = np.minimum if isinstance(e, Min) else np.maximum
                if isinstance(a.value, Fraction) and isinstance(b.value, Fraction):
                    return Const(min(a.value, b.value) if isinstance(e, Min) else max(a.value, b.value))
                return Const(float(fn(np.float64(float(a.value)), np.float64(float(b.value)))))
            return type(e)(a, b)
        if isinstance(e, Compare):
            a, b = self.run(e.a), self.run(e.b)
            if isinstance(a, Const) and isinstance(b, Const):
                return TRUE if _cmp(e.op, a.value, b.value) else FALSE
            return Compare(e.op, a, b)
        if isinstance(e, Piecewise):
            branches = []
            for cond, val in e.branches:
                cond = self.run(cond)
                if cond == FALSE:
                    continue
                branches.append((cond, self.run(val)))
                if cond == TRUE:
                    break
            if len(branches) == 1:
                return branches[0][1]
            return Piecewise(tuple(branches))
        raise TypeError(f"unknown node {type(e).__name__}")

    def _add(self, e):
        terms = []
        const = None
        for t in e.terms:
            t = self.run(t)
            parts = t.terms if isinstance(t, Add) else (t,)
            for p in parts:
                if isinstance(p, Const):
                    const = p.value if const is None else _fold_binary("+", const, p.value)
                else:
                    terms.append(p)
        if const is not None and not (const == 0 and isinstance(const, Fraction)):
            terms.append(_fold(const))
        if not terms:
            return _fold(const) if const is not None else ZERO
        if len(terms) == 1:
            return terms[0]
        return Add(tuple(terms))

    def _mul(self, e):
        factors = []
        const = None
        for f in e.factors:
            f = self.run(f)
            parts = f.factors if isinstance(f, Mul) else (f,)
            for p in parts:
                if isinstance(p, Const):
                    const = p.value if const is None else _fold_binary("*", const, p.value)
                else:
                    factors.append(p)
        if const is not None and const == 0:
            return ZERO
        if const is not None and not (const == 1 and isinstance(const, Fraction)):
            factors.insert(0, _fold(const))
        if not factors:
            return _fold(const) if const is not None else ONE
        if len(factors) == 1:
            return factors[0]
        return Mul(tuple(factors))


def differentiate(e: Expr, v: Var) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``v``.

    Piecewise nodes differentiate branch-wise with fixed conditions. At the
    kink of Abs/Min/Max the first branch is used: ``d|a| = a'`` for ``a >= 0``,
    ``dmin(a,b) = a'`` for ``a <= b``, ``dmax(a,b) = a'`` for ``a >= b``.
    """
    if not isinstance(v, Var):
        raise TypeError("differentiate needs a Var")
    memo: Dict[int, Expr] = {}
    has_v: Dict[int, bool] = {}

    def depends(node) -> bool:
        k = id(node)
        r = has_v.get(k)
        if r is None:
            r = node == v if isinstance(node, Var) else any(depends(c) for c in node.children())
            has_v[k] = r
        return r

    def d(node) -> Expr:
        k = id(node)
        if k in memo:
            return memo[k]
        if not depends(node):
            out = ZERO
        elif isinstance(node, Var):
            out = ONE
        elif isinstance(node, Add):
            out = Add(tuple(d(t) for t in node.terms))
        elif isinstance(node, Mul):
            terms = []
            fs = node.factors
            for i, f in enumerate(fs):
                if not depends(f):
                    continue
                terms.append(Mul(fs[:i] + (d(f),) + fs[i + 1 :]))
            out = Add(tuple(terms))
        elif isinstance(node, Div):
            a, b = node.num, node.den
            if not depends(b):
                out = Div(d(a), b)
            else:
                out = Div(Add((Mul((d(a), b)), Mul((Const(-1), a, d(b))))), Pow(b, 2))
        elif isinstance(node, Pow):
            n = node.exp
            out = Mul((Const(n), Pow(node.base, n - 1), d(node.base)))
        elif isinstance(node, Sqrt):
            out = Div(d(node.arg), Mul((Const(2), node)))
        elif isinstance(node, Abs):
            a = node.arg
            da = d(a)
            out = Piecewise(((Compare(">=", a, ZERO), da), (TRUE, Mul((Const(-1), da)))))
        elif isinstance(node, Min):
            out = Piecewise(((Compare("<=", node.a, node.b), d(node.a)), (TRUE, d(node.b))))
        elif isinstance(node, Max):
            out = Piecewise(((Compare(">=", node.a, node.b), d(node.a)), (TRUE, d(node.b))))
        elif isinstance(node, Piecewise):
            out = Piecewise(tuple((c, d(val)) for c, val in node.branches))
        elif isinstance(node, Compare):
            out = ZERO
        else:
            raise TypeError(f"cannot differentiate {type(node).__name__}")
        memo[k] = out
        return out

    return simplify(d(e))


def jacobian(F: Sequence[Expr], variables: Sequence[Var]):
    """Matrix (list of rows) of partial derivatives dF_i/dv_j."""
    return [[differentiate(as_expr(f), v) for v in variables] for f in F]


def substitute(e: Expr, bindings: Mapping[Var, Expr]) -> Expr:
    """Simultaneous replacement of variables; the result is simplified."""
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    for k in bindings:
        if not isinstance(k, Var):
            raise TypeError("substitution keys must be Var nodes")
    memo: Dict[int, Expr] = {}

    def go(node):
        k = id(node)
        if k in memo:
            return memo[k]
        if isinstance(node, Var):
            out = bindings.get(node, node)
        elif isinstance(node, (Const, BoolConst)):
            out = node
        elif isinstance(node, Add):
            out = Add(tuple(go(t) for t in node.terms))
        elif isinstance(node, Mul):
            out = Mul(tuple(go(t) for t in node.factors))
        elif isinstance(node, Div):
            out = Div(go(node.num), go(node.den))
        elif isinstance(node, Pow):
            out = Pow(go(node.base), node.exp)
        elif isinstance(node, (Sqrt, Abs)):
            out = type(node)(go(node.arg))
        elif isinstance(node, (Min, Max)):
            out = type(node)(go(node.a), go(node.b))
        elif isinstance(node, Compare):
            out = Compare(node.op, go(node.a), go(node.b))
        elif isinstance(node, Piecewise):
            out = Piecewise(tuple((go(c), go(v)) for c, v in node.branches))
        else:
            raise TypeError(f"unknown node {type(node).__name__}")
        memo[k] = out
        return out

    return simplify(go(e))


def total_derivative(e: Expr, chain: Mapping[Var, Expr]) -> Expr:
    """Chain-rule derivative along a direction: ``sum_v de/dv * chain[v]``.

    ``chain`` maps each variable that varies along the direction to the
    expression for its derivative (typically another aux variable); all
    other variables are treated as constant.
    """
    terms = []
    for v in sorted(free_vars(e) & set(chain), key=lambda v: (v.kind, v.index)):
        terms.append(Mul((differentiate(e, v), as_expr(chain[v]))))
    return simplify(Add(tuple(terms))) if terms else ZERO
