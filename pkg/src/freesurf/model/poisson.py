"""Steady 1D Poisson problem  -T'' + f = 0  with Dirichlet ends."""
from __future__ import annotations

from ..expr import VariableLayout
from .core import AuxUpdate, ModelDef, prescribe


def poisson_model(left: float = 1.0, right: float = 2.0, source: float = 2.0,
                  left_tag: str = "left", right_tag: str = "right") -> ModelDef:
    L = VariableLayout(("T",), ("ddTdxx",), {"f": source}, 1)
    return ModelDef(
        name="poisson",
        layout=L,
        residual=(-L.a("ddTdxx") + L.p("f"),),
        boundary_conditions=(prescribe(left_tag, {0: left}), prescribe(right_tag, {0: right})),
        initial_condition=(0,),
        aux_updates=(AuxUpdate("ddTdxx", L.state("T"), (2,)),),
        reconstruction_degree=2,
        boundary_data_in_stencils=True,
        depth_field=None,
    )
