"""Model definition: the symbolic pieces of a balance law and their compiled kernels."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..expr import (
    ZERO,
    Expr,
    Kernel,
    Var,
    VariableLayout,
    as_expr,
    free_vars,
    jacobian,
    simplify,
)


class ModelError(ValueError):
    pass


class UnsupportedOperationError(RuntimeError):
    pass


@dataclass(frozen=True)
class BoundaryCondition:
    """Ghost-cell rule attached to one physical tag.

    ``kind`` is ``"extrapolation"``, ``"periodic"`` (with ``partner`` tag) or
    ``"prescribe"`` (``values`` maps field index to an expression; fields not
    listed are extrapolated).
    """

    tag: str
    kind: str
    partner: Optional[str] = None
    values: Tuple[Tuple[int, Expr], ...] = ()

    def __post_init__(self):
        if self.kind not in ("extrapolation", "periodic", "prescribe"):
            raise ModelError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == "periodic" and not self.partner:
            raise ModelError(f"periodic boundary {self.tag!r} needs a partner tag")
        vals = self.values.items() if isinstance(self.values, Mapping) else self.values
        object.__setattr__(self, "values", tuple(sorted((int(i), as_expr(e)) for i, e in vals)))


def extrapolation(tag: str) -> BoundaryCondition:
    return BoundaryCondition(tag, "extrapolation")


def periodic(tag: str, partner: str) -> BoundaryCondition:
    return BoundaryCondition(tag, "periodic", partner)


def periodic_pair(a: str, b: str) -> Tuple[BoundaryCondition, BoundaryCondition]:
    return periodic(a, b), periodic(b, a)


def prescribe(tag: str, values: Mapping[int, object]) -> BoundaryCondition:
    return BoundaryCondition(tag, "prescribe", values=tuple(values.items()))


@dataclass(frozen=True)
class AuxUpdate:
    """Recompute aux field ``target`` from ``expr`` evaluated per cell.

    With ``derivative`` set (a multi-index) the stored value is the
    least-squares reconstruction of that derivative of ``expr``.
    """

    target: str
    expr: Expr
    derivative: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "expr", as_expr(self.expr))
        if self.derivative is not None:
            object.__setattr__(self, "derivative", tuple(int(a) for a in self.derivative))


def _zeros(n):
    return tuple(ZERO for _ in range(n))


@dataclass(frozen=True, eq=False)
class ModelDef:
    """A balance law  dQ/dt + div F(Q) + N(Q) : grad Q = S(Q)  plus optional residual R.

    ``flux[d]`` is the flux vector in direction ``d``; ``nonconservative[d]``
    the matrix multiplying ``dQ/dx_d`` (row = equation, column = field).
    Omitted pieces default to zero.
    """

    name: str
    layout: VariableLayout
    flux: Tuple[Tuple[Expr, ...], ...] = ()
    nonconservative: Tuple[Tuple[Tuple[Expr, ...], ...], ...] = ()
    source: Tuple[Expr, ...] = ()
    residual: Tuple[Expr, ...] = ()
    eigenvalues: Optional[Tuple[Expr, ...]] = None
    boundary_conditions: Tuple[BoundaryCondition, ...] = ()
    initial_condition: Tuple[Expr, ...] = ()
    aux_initial: Tuple[Expr, ...] = ()
    aux_updates: Tuple[AuxUpdate, ...] = ()
    reconstruction_degree: int = 1
    boundary_data_in_stencils: bool = False
    lift: Optional[Tuple[Expr, ...]] = None
    depth_field: Optional[int] = 0

    def __post_init__(self):
        n = self.layout.n_states
        d = self.layout.dimension
        set_ = lambda k, v: object.__setattr__(self, k, v)
        flux = tuple(tuple(as_expr(e) for e in f) for f in self.flux) or tuple(_zeros(n) for _ in range(d))
        nc = self.nonconservative or tuple(tuple(_zeros(n) for _ in range(n)) for _ in range(d))
        nc = tuple(tuple(tuple(as_expr(e) for e in row) for row in m) for m in nc)
        set_("flux", flux)
        set_("nonconservative", nc)
        set_("source", tuple(as_expr(e) for e in self.source) or _zeros(n))
        set_("residual", tuple(as_expr(e) for e in self.residual))
        set_("initial_condition", tuple(as_expr(e) for e in self.initial_condition) or _zeros(n))
        set_("aux_initial", tuple(as_expr(e) for e in self.aux_initial) or _zeros(self.layout.n_aux))
        set_("aux_updates", tuple(self.aux_updates))
        set_("boundary_conditions", tuple(self.boundary_conditions))
        if self.eigenvalues is not None:
            set_("eigenvalues", tuple(as_expr(e) for e in self.eigenvalues))
        if self.lift is not None:
            set_("lift", tuple(as_expr(e) for e in self.lift))
        self._validate()

    # -- checks ---------------------------------------------------------------

    def _validate(self):
        n, d = self.n_fields, self.dimension
        if len(self.flux) != d or any(len(f) != n for f in self.flux):
            raise ModelError(f"flux must hold {d} vectors of length {n}")
        if len(self.nonconservative) != d or any(len(m) != n or any(len(r) != n for r in m) for m in self.nonconservative):
            raise ModelError(f"nonconservative part must hold {d} matrices of shape {n}x{n}")
        if len(self.source) != n:
            raise ModelError(f"source must have length {n}")
        if len(self.initial_condition) != n:
            raise ModelError(f"initial condition must have length {n}")
        if len(self.aux_initial) != self.layout.n_aux:
            raise ModelError(f"aux initial condition must have length {self.layout.n_aux}")
        if self.lift is not None and len(self.lift) != 5:
            raise ModelError("lifting map must give (rho, u, v, w, p)")
        for e in self.all_expressions():
            for v in free_vars(e):
                if not self.layout.contains(v):
                    raise ModelError(f"expression uses {v.name or v.kind} which is not in the layout")
        for u in self.aux_updates:
            if u.target not in self.layout.aux:
                raise ModelError(f"aux update targets unknown aux field {u.target!r}")
            if u.derivative is not None and len(u.derivative) != d:
                raise ModelError(f"derivative {u.derivative} does not match dimension {d}")
        tags = [bc.tag for bc in self.boundary_conditions]
        if len(set(tags)) != len(tags):
            raise ModelError("boundary condition tags must be unique")
        by_tag = {bc.tag: bc for bc in self.boundary_conditions}
        for bc in self.boundary_conditions:
            if bc.kind == "periodic":
                other = by_tag.get(bc.partner)
                if other is None or other.kind != "periodic" or other.partner != bc.tag:
                    raise ModelError(f"periodic boundary {bc.tag!r} -> {bc.partner!r} is not paired back")
            for i, _ in bc.values:
                if not 0 <= i < n:
                    raise ModelError(f"prescribed field index {i} out of range on tag {bc.tag!r}")

    def all_expressions(self):
        for f in self.flux:
            yield from f
        for m in self.nonconservative:
            for row in m:
                yield from row
        yield from self.source
        yield from self.residual
        yield from self.eigenvalues or ()
        yield from self.initial_condition
        yield from self.aux_initial
        yield from self.lift or ()
        for u in self.aux_updates:
            yield u.expr
        for bc in self.boundary_conditions:
            for _, e in bc.values:
                yield e

    # -- convenience ------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.layout.dimension

    @property
    def n_fields(self) -> int:
        return self.layout.n_states

    @property
    def n_aux(self) -> int:
        return self.layout.n_aux

    @property
    def field_names(self) -> Tuple[str, ...]:
        return self.layout.states

    @property
    def aux_names(self) -> Tuple[str, ...]:
        return self.layout.aux

    def default_params(self) -> np.ndarray:
        return np.array(self.layout.param_defaults, dtype=float)

    def params(self, **overrides) -> np.ndarray:
        """Parameter vector with defaults replaced by ``overrides``."""
        p = dict(self.layout.params)
        for k, v in overrides.items():
            if k not in p:
                raise KeyError(f"unknown parameter {k!r}")
            p[k] = float(v)
        return np.array([p[k] for k in self.layout.param_names], dtype=float)

    def replace(self, **changes) -> "ModelDef":
        return dataclasses.replace(self, **changes)

    def with_bcs(self, *bcs) -> "ModelDef":
        flat = []
        for b in bcs:
            flat.extend(b if isinstance(b, (tuple, list)) else [b])
        return self.replace(boundary_conditions=tuple(flat))

    def with_initial_condition(self, ic: Sequence) -> "ModelDef":
        return self.replace(initial_condition=tuple(ic))

    def with_params(self, **overrides) -> "ModelDef":
        return self.replace(layout=self.layout.with_params(**overrides))

    @cached_property
    def kernels(self) -> "ModelKernels":
        return ModelKernels(self)


def _flat(matrix):
    return [e for row in matrix for e in row]


class ModelKernels:
    """Compiled numeric kernels of a model, built on first use."""

    def __init__(self, model: ModelDef):
        self.model = model
        self._cache: Dict[str, Kernel] = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = Kernel(build(), self.model.layout, key)
        return self._cache[key]

    def flux(self, d: int) -> Kernel:
        return self._get(f"flux_{d}", lambda: self.model.flux[d])

    def nonconservative(self, d: int) -> Kernel:
        return self._get(f"nc_{d}", lambda: _flat(self.model.nonconservative[d]))

    def quasilinear(self, d: int) -> Kernel:
        """Entries of dF_d/dQ + N_d, row-major."""

        def build():
            m = self.model
            J = jacobian(m.flux[d], m.layout.Q)
            return [simplify(J[i][j] + m.nonconservative[d][i][j])
                    for i in range(m.n_fields) for j in range(m.n_fields)]

        return self._get(f"quasi_{d}", build)

    @property
    def source(self) -> Kernel:
        return self._get("source", lambda: self.model.source)

    @property
    def source_jacobian(self) -> Kernel:
        return self._get("source_jac", lambda: _flat(jacobian(self.model.source, self.model.layout.Q)))

    @property
    def residual(self) -> Kernel:
        if not self.model.residual:
            raise UnsupportedOperationError(f"model {self.model.name!r} has no residual")
        return self._get("residual", lambda: self.model.residual)

    @property
    def eigenvalues(self) -> Optional[Kernel]:
        if self.model.eigenvalues is None:
            return None
        return self._get("eigenvalues", lambda: self.model.eigenvalues)

    @property
    def initial_condition(self) -> Kernel:
        return self._get("ic", lambda: self.model.initial_condition)

    @property
    def aux_initial(self) -> Kernel:
        return self._get("aux_ic", lambda: self.model.aux_initial)

    @property
    def lift(self) -> Kernel:
        if self.model.lift is None:
            raise UnsupportedOperationError(f"model {self.model.name!r} has no lifting map")
        return self._get("lift", lambda: self.model.lift)

    def aux_update(self, k: int) -> Kernel:
        return self._get(f"aux_update_{k}", lambda: [self.model.aux_updates[k].expr])

    def boundary(self, tag: str) -> Kernel:
        bc = next(b for b in self.model.boundary_conditions if b.tag == tag)
        return self._get(f"bc_{tag}", lambda: [e for _, e in bc.values])


def coords_array(points: np.ndarray, dist=None) -> np.ndarray:
    """Pack (n, dim) positions into the (4, n) coordinate block (x, y, z, dist)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    X = np.zeros((4, points.shape[0]))
    X[: points.shape[1]] = points.T
    if dist is not None:
        X[3] = dist
    return X


def as_params(model: ModelDef, params) -> np.ndarray:
    if params is None:
        return model.default_params()
    if isinstance(params, Mapping):
        return model.params(**params)
    p = np.asarray(params, dtype=float)
    if p.shape != (len(model.layout.params),):
        raise ModelError(f"expected {len(model.layout.params)} parameters, got shape {p.shape}")
    return p
