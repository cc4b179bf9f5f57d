"""Immutable expression tree nodes and the variable layout they are resolved against."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number, Rational
from typing import Dict, Iterable, Sequence, Tuple, Union

SLOT_KINDS = ("state", "aux", "param", "coord", "normal", "time")
COORD_NAMES = ("x", "y", "z", "dist")
NORMAL_NAMES = ("nx", "ny")
COMPARE_OPS = ("<", "<=", ">", ">=")


def as_expr(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        return BoolConst(value)
    if isinstance(value, (int, Rational)):
        return Const(Fraction(value))
    if isinstance(value, Number):
        return Const(float(value))
    raise TypeError(f"cannot convert {value!r} to an expression")


class Expr:
    """Base class; arithmetic operators build (unsimplified) trees."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Const(Fraction(-1)), as_expr(other)))))

    def __rsub__(self, other):
        return Add((as_expr(other), Mul((Const(Fraction(-1)), self))))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __neg__(self):
        return Mul((Const(Fraction(-1)), self))

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return Pow(self, n)

    # comparisons build Compare nodes; equality stays structural
    def __lt__(self, other):
        return Compare("<", self, as_expr(other))

    def __le__(self, other):
        return Compare("<=", self, as_expr(other))

    def __gt__(self, other):
        return Compare(">", self, as_expr(other))

    def __ge__(self, other):
        return Compare(">=", self, as_expr(other))

    def children(self) -> Tuple["Expr", ...]:
        return ()

    def __str__(self):
        from .printer import to_string

        return to_string(self)


@dataclass(frozen=True, eq=True, repr=True)
class Const(Expr):
    value: Union[Fraction, float]

    def __post_init__(self):
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (Fraction, float)):
            if isinstance(v, (int, Rational)):
                object.__setattr__(self, "value", Fraction(v))
            else:
                object.__setattr__(self, "value", float(v))

    @property
    def is_rational(self) -> bool:
        return isinstance(self.value, Fraction)


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class Var(Expr):
    kind: str
    index: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in SLOT_KINDS:
            raise ValueError(f"unknown slot kind {self.kind!r}")


@dataclass(frozen=True)
class Add(Expr):
    terms: Tuple[Expr, ...]

    def children(self):
        return self.terms


@dataclass(frozen=True)
class Mul(Expr):
    factors: Tuple[Expr, ...]

    def children(self):
        return self.factors


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr

    def children(self):
        return (self.num, self.den)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int

    def children(self):
        return (self.base,)


@dataclass(frozen=True)
class Sqrt(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Min(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Max(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Compare(Expr):
    op: str
    a: Expr
    b: Expr

    def __post_init__(self):
        if self.op not in COMPARE_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def children(self):
        return (self.a, self.b)


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Piecewise(Expr):
    """Ordered (condition, value) branches; the last condition is always TRUE."""

    branches: Tuple[Tuple[Expr, Expr], ...]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("Piecewise needs at least one branch")
        if self.branches[-1][0] != TRUE:
            raise ValueError("last Piecewise branch must have the condition TRUE")

    def children(self):
        out = []
        for cond, val in self.branches:
            out.append(cond)
            out.append(val)
        return tuple(out)


# Const holds Fraction or float; hash on (type, value) so 1 and 1.0 stay distinct keys.
def _const_hash(self):
    return hash((Const, type(self.value), self.value))


def _const_eq(self, other):
    return (
        isinstance(other, Const)
        and type(self.value) is type(other.value)
        and self.value == other.value
    )


Const.__hash__ = _const_hash
Const.__eq__ = _const_eq


def const(v) -> Const:
    return Const(v)


def sqrt(e) -> Sqrt:
    return Sqrt(as_expr(e))


def absolute(e) -> Abs:
    return Abs(as_expr(e))


def minimum(a, b) -> Min:
    return Min(as_expr(a), as_expr(b))


def maximum(a, b) -> Max:
    return Max(as_expr(a), as_expr(b))


def piecewise(*branches) -> Piecewise:
    """Build a Piecewise from ``(value, condition)`` pairs, sympy style.

    A condition of ``True`` marks the fallback branch and must be present.
    """
    out = []
    for value, cond in branches:
        cond = TRUE if cond is True else as_expr(cond)
        out.append((cond, as_expr(value)))
        if cond == TRUE:
            break
    if out[-1][0] != TRUE:
        raise ValueError("piecewise needs a final branch with condition True")
    return Piecewise(tuple(out))


def free_vars(e: Expr) -> set:
    seen = set()
    stack = [e]
    out = set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            out.add(node)
        else:
            stack.extend(node.children())
    return out


@dataclass(frozen=True)
class VariableLayout:
    """Names of the variable slots a model's expressions are written in.

    States, aux fields and parameters are indexed by position. Coordinates
    are ``x, y, z`` plus ``dist`` (ghost distance, boundary expressions only);
    normals ``nx, ny``; time ``t``. All names must be distinct across slots.
    """

    states: Tuple[str, ...]
    aux: Tuple[str, ...] = ()
    params: Tuple[Tuple[str, float], ...] = ()
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "aux", tuple(self.aux))
        params = self.params
        if isinstance(params, dict):
            params = tuple(params.items())
        object.__setattr__(self, "params", tuple((str(k), float(v)) for k, v in params))
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        names = list(self.states) + list(self.aux) + [k for k, _ in self.params]
        reserved = set(COORD_NAMES) | set(NORMAL_NAMES) | {"t"}
        seen = set()
        for n in names:
            if n in seen:
                raise ValueError(f"duplicate variable name {n!r}")
            if n in reserved:
                raise ValueError(f"{n!r} is a reserved name")
            seen.add(n)

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_aux(self) -> int:
        return len(self.aux)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(k for k, _ in self.params)

    @property
    def param_defaults(self) -> Tuple[float, ...]:
        return tuple(v for _, v in self.params)

    def q(self, i: int) -> Var:
        return Var("state", i, self.states[i])

    def state(self, name: str) -> Var:
        return Var("state", self.states.index(name), name)

    def a(self, name: str) -> Var:
        return Var("aux", self.aux.index(name), name)

    def p(self, name: str) -> Var:
        return Var("param", self.param_names.index(name), name)

    @property
    def Q(self) -> Tuple[Var, ...]:
        return tuple(self.q(i) for i in range(self.n_states))

    @property
    def x(self) -> Var:
        return Var("coord", 0, "x")

    @property
    def y(self) -> Var:
        return Var("coord", 1, "y")

    @property
    def z(self) -> Var:
        return Var("coord", 2, "z")

    @property
    def dist(self) -> Var:
        return Var("coord", 3, "dist")

    @property
    def t(self) -> Var:
        return Var("time", 0, "t")

    def n(self, i: int) -> Var:
        return Var("normal", i, NORMAL_NAMES[i])

    def lookup(self, name: str) -> Var:
        """Resolve an identifier; raises KeyError when unknown."""
        if name in self.states:
            return self.state(name)
        if name in self.aux:
            return self.a(name)
        if name in self.param_names:
            return self.p(name)
        if name in COORD_NAMES:
            return Var("coord", COORD_NAMES.index(name), name)
        if name in NORMAL_NAMES:
            return Var("normal", NORMAL_NAMES.index(name), name)
        if name == "t":
            return self.t
        raise KeyError(name)

    def size(self, kind: str) -> int:
        return {
            "state": self.n_states,
            "aux": self.n_aux,
            "param": len(self.params),
            "coord": len(COORD_NAMES),
            "normal": len(NORMAL_NAMES),
            "time": 1,
        }[kind]

    def contains(self, v: Var) -> bool:
        return 0 <= v.index < self.size(v.kind)

    def name_of(self, v: Var) -> str:
        if v.kind == "state":
            return self.states[v.index]
        if v.kind == "aux":
            return self.aux[v.index]
        if v.kind == "param":
            return self.param_names[v.index]
        if v.kind == "coord":
            return COORD_NAMES[v.index]
        if v.kind == "normal":
            return NORMAL_NAMES[v.index]
        return "t"

    def with_params(self, **overrides) -> "VariableLayout":
        params = dict(self.params)
        for k, v in overrides.items():
            if k not in params:
                raise KeyError(f"unknown parameter {k!r}")
            params[k] = float(v)
        return VariableLayout(self.states, self.aux, tuple(params.items()), self.dimension)


def as_vector(exprs: Iterable) -> Tuple[Expr, ...]:
    return tuple(as_expr(e) for e in exprs)


ExprLike = Union[Expr, int, float, Fraction]
Bindings = Dict[Union[Var, str], object]
ExprVector = Sequence[Expr]
