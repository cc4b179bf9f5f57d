"""Non-hydrostatic VAM system: a hyperbolic predictor and an elliptic pressure corrector."""
from __future__ import annotations

from fractions import Fraction

from ..expr import ZERO, VariableLayout, free_vars, simplify, substitute, total_derivative
from .core import AuxUpdate, ModelDef

THIRD = Fraction(1, 3)

PREDICTOR_STATES = ("h", "hu0", "hu1", "hw0", "hw1")
PREDICTOR_AUX = ("w2", "p0", "p1", "dhp0dx", "dhdx", "dbdx", "b")
CORRECTOR_STATES = ("p0", "p1")
CORRECTOR_AUX = (
    "h", "hu0", "hu1", "hw0", "hw1",
    "dhdx", "d2hdx2", "dhu0dx", "dhu1dx",
    "b", "dbdx", "d2bdx2",
    "dp0dx", "dp1dx", "d2p0dx2", "d2p1dx2",
)


def pressure_source(h, dhdx, dbdx, p0, p1, dhp0dx):
    """Non-hydrostatic source S^P, used as Q** = Q* + dt S^P."""
    return (
        ZERO,
        dhp0dx + 2 * p1 * dbdx,
        -(3 * p0 - p1) * dhdx - 6 * (p0 - p1) * dbdx,
        2 * p1,
        6 * (p0 - p1),
    )


def _predictor(g: float) -> ModelDef:
    L = VariableLayout(PREDICTOR_STATES, PREDICTOR_AUX, {"g": g}, 1)
    h, hu0, hu1, hw0, hw1 = L.Q
    w2, p0, p1, dhp0dx, dhdx, dbdx, b = (L.a(k) for k in PREDICTOR_AUX)
    G = L.p("g")
    u0, u1 = hu0 / h, hu1 / h
    flux = (
        hu0,
        hu0 * hu0 / h + THIRD * (hu1 * hu1 / h),
        2 * (hu0 * hu1 / h),
        hu0 * hw0 / h + THIRD * (hu1 * hw1 / h),
        hu0 * hw1 / h + u1 * (hw0 + Fraction(2, 5) * h * w2),
    )
    nc = [[ZERO] * 5 for _ in range(5)]
    nc[1][0] = G * h
    nc[2][2] = -u0
    nc[4][2] = Fraction(1, 5) * w2 - hw0 / h
    updates = (
        AuxUpdate("dhdx", h, (1,)),
        AuxUpdate("dbdx", b, (1,)),
        AuxUpdate("dhp0dx", h * p0, (1,)),
        AuxUpdate("w2", -(hw0 / h + hw1 / h) + (u0 + u1) * dbdx),
    )
    return ModelDef(
        name="vam_predictor",
        layout=L,
        flux=(tuple(simplify(f) for f in flux),),
        nonconservative=(tuple(tuple(simplify(e) for e in row) for row in nc),),
        source=tuple(simplify(s) for s in pressure_source(h, dhdx, dbdx, p0, p1, dhp0dx)),
        initial_condition=(1, 0, 0, 0, 0),
        aux_updates=updates,
        reconstruction_degree=1,
    )


def _residual_template():
    """R0, R1 written on placeholder values U and x-derivatives dU of the corrected state."""
    L = VariableLayout(
        ("H", "HU0", "HU1", "HW0", "HW1", "dH", "dHU0", "dHU1", "DB"), (), (), 1
    )
    H, HU0, HU1, HW0, HW1, dH, dHU0, dHU1, DB = L.Q
    u0, u1, w0, w1 = HU0 / H, HU1 / H, HW0 / H, HW1 / H
    du0 = dHU0 / H - HU0 * dH / H**2
    dhu1 = dHU1
    R0 = H * du0 + THIRD * dhu1 + THIRD * u1 * dH + 2 * (w0 - u0 * DB)
    R1 = H * du0 + u1 * dH + 2 * (u1 * DB - w1)
    return L, (R0, R1)


def _corrector(g: float) -> ModelDef:
    L = VariableLayout(CORRECTOR_STATES, CORRECTOR_AUX, {"g": g, "dt": 0.0}, 1)
    p0, p1 = L.Q
    a = {k: L.a(k) for k in CORRECTOR_AUX}
    dt = L.p("dt")
    S = pressure_source(a["h"], a["dhdx"], a["dbdx"], p0, p1,
                        a["dhdx"] * p0 + a["h"] * a["dp0dx"])
    Qstar = (a["h"], a["hu0"], a["hu1"], a["hw0"], a["hw1"])
    U = [simplify(q + dt * s) for q, s in zip(Qstar, S)]
    chain = {
        a["h"]: a["dhdx"], a["dhdx"]: a["d2hdx2"],
        a["hu0"]: a["dhu0dx"], a["hu1"]: a["dhu1dx"],
        a["b"]: a["dbdx"], a["dbdx"]: a["d2bdx2"],
        p0: a["dp0dx"], a["dp0dx"]: a["d2p0dx2"],
        p1: a["dp1dx"], a["dp1dx"]: a["d2p1dx2"],
    }
    dU = [total_derivative(U[k], chain) for k in range(3)]
    T, (R0, R1) = _residual_template()
    H, HU0, HU1, HW0, HW1, dH, dHU0, dHU1, DB = T.Q
    bind = {H: U[0], HU0: U[1], HU1: U[2], HW0: U[3], HW1: U[4],
            dH: dU[0], dHU0: dU[1], dHU1: dU[2], DB: a["dbdx"]}
    residual = (substitute(R0, bind), substitute(R1, bind))
    for r in residual:
        for v in free_vars(r):
            # template placeholders must all be gone after substitution
            assert layout_has(L, v), f"corrector residual still references {v.name}"
    updates = (
        AuxUpdate("dhdx", a["h"], (1,)),
        AuxUpdate("d2hdx2", a["h"], (2,)),
        AuxUpdate("dhu0dx", a["hu0"], (1,)),
        AuxUpdate("dhu1dx", a["hu1"], (1,)),
        AuxUpdate("dbdx", a["b"], (1,)),
        AuxUpdate("d2bdx2", a["b"], (2,)),
        AuxUpdate("dp0dx", p0, (1,)),
        AuxUpdate("dp1dx", p1, (1,)),
        AuxUpdate("d2p0dx2", p0, (2,)),
        AuxUpdate("d2p1dx2", p1, (2,)),
    )
    return ModelDef(
        name="vam_corrector",
        layout=L,
        residual=residual,
        initial_condition=(0, 0),
        aux_updates=updates,
        reconstruction_degree=2,
        boundary_data_in_stencils=True,
        depth_field=None,
    )


def layout_has(layout, v) -> bool:
    return layout.contains(v) and layout.name_of(v) == v.name


def vam_models(g: float = 9.81):
    """(predictor, corrector). The corrector's ``dt`` parameter is bound every step."""
    return _predictor(g), _corrector(g)
