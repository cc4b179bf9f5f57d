"""Shallow water equations in one and two horizontal dimensions."""
from __future__ import annotations

from fractions import Fraction

from ..expr import ZERO, VariableLayout, maximum, piecewise, sqrt
from .core import AuxUpdate, ModelDef, ModelError

HALF = Fraction(1, 2)


def hydrostatic_pressure(g, h):
    """Depth-integrated hydrostatic pressure g h^2 / 2."""
    return HALF * g * h**2


def momentum_product(a, b, h):
    """(h a)(h b)/h, the advective flux of one depth-integrated velocity by another."""
    return a * b / h


def _unit_direction(layout):
    return [layout.n(i) for i in range(layout.dimension)]


def _lift_columns(layout, h, u, v, divergence, rho, g):
    z = layout.z
    return (
        piecewise((rho, h - z >= 0), (0, True)),
        u,
        v,
        -h * divergence,
        rho * g * maximum(h - z, 0),
    )


def swe_model(dimension: int = 1, g: float = 9.81, rho: float = 1000.0) -> ModelDef:
    if dimension not in (1, 2):
        raise ModelError(f"dimension must be 1 or 2, got {dimension}")
    states = ("h", "hu") if dimension == 1 else ("h", "hu", "hv")
    aux = ("dudx",) if dimension == 1 else ("dudx", "dvdy")
    L = VariableLayout(states, aux, {"g": g, "rho": rho}, dimension)
    h, hu = L.state("h"), L.state("hu")
    G, R = L.p("g"), L.p("rho")
    p = hydrostatic_pressure(G, h)
    n = _unit_direction(L)
    c = sqrt(G * h)
    if dimension == 1:
        flux = ((hu, momentum_product(hu, hu, h) + p),)
        un = hu / h * n[0]
        eig = (un - c, un + c)
        updates = (AuxUpdate("dudx", hu / h, (1,)),)
        lift = _lift_columns(L, h, hu / h, ZERO, L.a("dudx"), R, G)
    else:
        hv = L.state("hv")
        flux = (
            (hu, momentum_product(hu, hu, h) + p, momentum_product(hu, hv, h)),
            (hv, momentum_product(hu, hv, h), momentum_product(hv, hv, h) + p),
        )
        un = (hu * n[0] + hv * n[1]) / h
        eig = (un - c, un, un + c)
        updates = (AuxUpdate("dudx", hu / h, (1, 0)), AuxUpdate("dvdy", hv / h, (0, 1)))
        lift = _lift_columns(L, h, hu / h, hv / h, L.a("dudx") + L.a("dvdy"), R, G)
    return ModelDef(
        name="swe",
        layout=L,
        flux=flux,
        eigenvalues=eig,
        initial_condition=(1,) + (0,) * dimension,
        aux_updates=updates,
        reconstruction_degree=1,
        lift=lift,
    )
