"""Symbolic expression layer: build, manipulate, parse and compile PDE expressions."""
from .kernel import Kernel, UnboundVariableError, UnknownVariableError, compile_kernel, evaluate
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
    VariableLayout,
    absolute,
    as_expr,
    free_vars,
    maximum,
    minimum,
    piecewise,
    sqrt,
)
from .ops import ONE, ZERO, differentiate, jacobian, simplify, substitute, total_derivative
from .parser import ExprSyntaxError, UnknownIdentifierError, parse
from .printer import to_string

__all__ = [
    "Abs", "Add", "BoolConst", "Compare", "Const", "Div", "Expr", "FALSE", "Kernel", "Max",
    "Min", "Mul", "ONE", "Piecewise", "Pow", "Sqrt", "TRUE", "Var", "VariableLayout", "ZERO",
    "ExprSyntaxError", "UnboundVariableError", "UnknownIdentifierError", "UnknownVariableError",
    "absolute", "as_expr", "compile_kernel", "differentiate", "evaluate", "free_vars",
    "jacobian", "maximum", "minimum", "parse", "piecewise", "simplify", "sqrt", "substitute",
    "to_string", "total_derivative",
]
