"""Numeric evaluation: a tree-walking interpreter and a compiled kernel.

Both paths share the same IEEE primitives so their results agree bit for bit;
the interpreter is the reference the compiled kernels are tested against.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

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
    VariableLayout,
    as_expr,
)


class UnboundVariableError(KeyError):
    pass


class UnknownVariableError(ValueError):
    pass


def _ipow(x, n: int):
    if n == 2:
        return x * x
    return np.power(x, np.float64(n))


def _select(conds, values):
    """First-true selection; the final value is the fallback."""
    if all(np.ndim(c) == 0 for c in conds):
        for c, v in zip(conds, values):
            if c:
                return v
        return values[-1]
    shape = np.broadcast_shapes(*(np.shape(c) for c in conds), *(np.shape(v) for v in values))
    conds = [np.broadcast_to(c, shape) for c in conds[:-1]]
    choices = [np.broadcast_to(v, shape) for v in values[:-1]]
    return np.select(conds, choices, default=np.broadcast_to(values[-1], shape))


_CMP = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
}


def _const_value(c: Const):
    return np.float64(float(c.value))


def evaluate(e: Expr, bindings: Mapping) -> float:
    """Interpret ``e`` in double precision.

    ``bindings`` maps Var nodes (or variable names) to numbers or arrays.
    Division by zero follows IEEE rules and never raises.
    """
    memo: Dict[int, object] = {}

    def lookup(v: Var):
        if v in bindings:
            return bindings[v]
        if v.name and v.name in bindings:
            return bindings[v.name]
        raise UnboundVariableError(f"unbound variable {v.name or (v.kind, v.index)}")

    def go(node):
        k = id(node)
        if k in memo:
            return memo[k]
        if isinstance(node, Const):
            out = _const_value(node)
        elif isinstance(node, BoolConst):
            out = node.value
        elif isinstance(node, Var):
            val = lookup(node)
            out = np.float64(val) if np.ndim(val) == 0 else np.asarray(val, dtype=float)
        elif isinstance(node, Add):
            out = go(node.terms[0])
            for t in node.terms[1:]:
                out = out + go(t)
        elif isinstance(node, Mul):
            out = go(node.factors[0])
            for f in node.factors[1:]:
                out = out * go(f)
        elif isinstance(node, Div):
            out = go(node.num) / go(node.den)
        elif isinstance(node, Pow):
            out = _ipow(go(node.base), node.exp)
        elif isinstance(node, Sqrt):
            out = np.sqrt(go(node.arg))
        elif isinstance(node, Abs):
            out = np.abs(go(node.arg))
        elif isinstance(node, Min):
            out = np.minimum(go(node.a), go(node.b))
        elif isinstance(node, Max):
            out = np.maximum(go(node.a), go(node.b))
        elif isinstance(node, Compare):
            out = _CMP[node.op](go(node.a), go(node.b))
        elif isinstance(node, Piecewise):
            conds = [go(c) for c, _ in node.branches]
            vals = [go(v) for _, v in node.branches]
            out = _select(conds, vals)
        else:
            raise TypeError(f"unknown node {type(node).__name__}")
        memo[k] = out
        return out

    with np.errstate(all="ignore"):
        return go(as_expr(e))


_SLOT_ARG = {"state": "Q", "aux": "A", "param": "P", "coord": "X", "normal": "N"}


class Kernel:
    """Compiled evaluator for a fixed vector of expressions.

    Call as ``kernel(t, X, Q, Qaux, params, normal=None)``. Per-cell inputs
    carry the slot index first (``Q[i]`` is field ``i``) and may have any
    trailing cell shape; the output has shape ``(n_out,) + cell_shape``.
    """

    def __init__(self, exprs: Sequence[Expr], layout: VariableLayout, name: str = "kernel"):
        self.exprs = tuple(as_expr(e) for e in exprs)
        self.layout = layout
        self.name = name
        self.n_out = len(self.exprs)
        self.source, consts = _generate(self.exprs, layout, name)
        namespace = {
            "np": np,
            "_ipow": _ipow,
            "_select": _select,
            "_lt": np.less,
            "_le": np.less_equal,
            "_gt": np.greater,
            "_ge": np.greater_equal,
        }
        namespace.update(consts)
        exec(compile(self.source, f"<{name}>", "exec"), namespace)
        self._fn = namespace[name]

    def __call__(self, t, X, Q, Qaux, params, normal=None):
        Q = np.asarray(Q, dtype=float)
        A = np.asarray(Qaux, dtype=float) if Qaux is not None else np.zeros((0,) + Q.shape[1:])
        P = np.asarray(params, dtype=float)
        X = np.asarray(X, dtype=float) if X is not None else None
        N = np.asarray(normal, dtype=float) if normal is not None else None
        with np.errstate(all="ignore"):
            values = self._fn(np.float64(t), X, Q, A, P, N)
        cell_shape = Q.shape[1:] if Q.ndim > 1 else ()
        shapes = [np.shape(v) for v in values] + [cell_shape]
        if X is not None and X.ndim > 1:
            shapes.append(X.shape[1:])
        shape = np.broadcast_shapes(*shapes)
        out = np.empty((self.n_out,) + shape)
        for i, v in enumerate(values):
            out[i] = v
        return out


def compile_kernel(exprs: Sequence[Expr], layout: VariableLayout, name: str = "kernel") -> Kernel:
    return Kernel(exprs, layout, name)


def _generate(exprs, layout: VariableLayout, name: str):
    """Lower expressions to straight-line numpy code with shared subexpressions."""
    lines: List[str] = []
    consts: Dict[str, np.float64] = {}
    const_names: Dict[float, str] = {}
    names: Dict[int, str] = {}
    structural: Dict[tuple, str] = {}
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"_t{counter[0]}"

    def const_name(value) -> str:
        v = float(value)
        key = (v, np.signbit(v)) if v == v else ("nan",)
        if key not in const_names:
            nm = f"_c{len(const_names)}"
            const_names[key] = nm
            consts[nm] = np.float64(v)
        return const_names[key]

    def emit(key, code):
        if key in structural:
            return structural[key]
        nm = fresh()
        lines.append(f"    {nm} = {code}")
        structural[key] = nm
        return nm

    def go(node) -> str:
        k = id(node)
        if k in names:
            return names[k]
        if isinstance(node, Const):
            out = const_name(node.value)
        elif isinstance(node, BoolConst):
            out = "True" if node.value else "False"
        elif isinstance(node, Var):
            if not layout.contains(node):
                raise UnknownVariableError(
                    f"variable {node.name or node.kind}[{node.index}] is not part of the layout"
                )
            if node.kind == "time":
                out = "t"
            else:
                out = f"{_SLOT_ARG[node.kind]}[{node.index}]"
        elif isinstance(node, Add):
            args = [go(t) for t in node.terms]
            out = emit(("add",) + tuple(args), " + ".join(args))
        elif isinstance(node, Mul):
            args = [go(t) for t in node.factors]
            out = emit(("mul",) + tuple(args), " * ".join(args))
        elif isinstance(node, Div):
            a, b = go(node.num), go(node.den)
            out = emit(("div", a, b), f"{a} / {b}")
        elif isinstance(node, Pow):
            a = go(node.base)
            out = emit(("pow", a, node.exp), f"_ipow({a}, {node.exp})")
        elif isinstance(node, Sqrt):
            a = go(node.arg)
            out = emit(("sqrt", a), f"np.sqrt({a})")
        elif isinstance(node, Abs):
            a = go(node.arg)
            out = emit(("abs", a), f"np.abs({a})")
        elif isinstance(node, Min):
            a, b = go(node.a), go(node.b)
            out = emit(("min", a, b), f"np.minimum({a}, {b})")
        elif isinstance(node, Max):
            a, b = go(node.a), go(node.b)
            out = emit(("max", a, b), f"np.maximum({a}, {b})")
        elif isinstance(node, Compare):
            a, b = go(node.a), go(node.b)
            fn = {"<": "_lt", "<=": "_le", ">": "_gt", ">=": "_ge"}[node.op]
            out = emit(("cmp", node.op, a, b), f"{fn}({a}, {b})")
        elif isinstance(node, Piecewise):
            conds = [go(c) for c, _ in node.branches]
            vals = [go(v) for _, v in node.branches]
            out = emit(
                ("pw",) + tuple(conds) + tuple(vals),
                f"_select(({', '.join(conds)},), ({', '.join(vals)},))",
            )
        else:
            raise TypeError(f"unknown node {type(node).__name__}")
        names[k] = out
        return out

    results = [go(e) for e in exprs]
    body = "\n".join(lines)
    src = f"def {name}(t, X, Q, A, P, N):\n{body}\n    return ({', '.join(results)}{',' if results else ''})\n"
    return src, consts
