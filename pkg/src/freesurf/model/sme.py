"""Shallow moment equations: the SWE hierarchy with polynomial vertical velocity profiles."""
from __future__ import annotations

from fractions import Fraction

from ..basis import legendre_shifted, moment_tensors
from ..expr import ZERO, Add, Const, VariableLayout, minimum, simplify
from .core import AuxUpdate, ModelDef, ModelError
from .swe import _lift_columns, hydrostatic_pressure, momentum_product

MAX_LEVEL = 8


def _sum(terms):
    terms = list(terms)
    if not terms:
        return ZERO
    return simplify(terms[0] if len(terms) == 1 else Add(tuple(terms)))


def poly_expr(coeffs, zeta):
    """Horner form of an exact-coefficient polynomial in an expression."""
    acc = Const(coeffs[-1]) if coeffs else ZERO
    for c in reversed(coeffs[:-1]):
        acc = acc * zeta + Const(c)
    return acc


def sme_model(dimension: int = 1, level: int = 0, g: float = 9.81, rho: float = 1000.0,
              nu: float = 0.0, C: float = 0.0) -> ModelDef:
    """Moment system of order ``level``; states h, ha0..haN (and hb0..hbN in 2D).

    Source: Newtonian bulk friction with viscosity ``nu`` and a slip law at the
    bottom with coefficient ``C``.
    """
    if dimension not in (1, 2):
        raise ModelError(f"dimension must be 1 or 2, got {dimension}")
    if not isinstance(level, int) or level < 0:
        raise ModelError(f"moment level must be a non-negative integer, got {level!r}")
    if level > MAX_LEVEL:
        raise ModelError(f"moment level {level} exceeds the supported maximum {MAX_LEVEL}")
    N = level
    T = moment_tensors(N)
    K = range(N + 1)
    names = ["h"] + [f"ha{k}" for k in K]
    if dimension == 2:
        names += [f"hb{k}" for k in K]
    aux = ("dudx",) if dimension == 1 else ("dudx", "dvdy")
    L = VariableLayout(tuple(names), aux, {"g": g, "rho": rho, "nu": nu, "C": C}, dimension)
    h = L.state("h")
    G, R, NU, CS = (L.p(k) for k in ("g", "rho", "nu", "C"))
    ha = [L.state(f"ha{k}") for k in K]
    hb = [L.state(f"hb{k}") for k in K] if dimension == 2 else []
    ia = [1 + k for k in K]
    ib = [2 + N + k for k in K]
    n = L.n_states
    p = hydrostatic_pressure(G, h)

    def coeff(x, k):
        return Const(Fraction(x) / T.M[k])

    def advective(a, b, k):
        """Projection of (h a b) onto phi_k, divided by M_k."""
        terms = []
        for i in K:
            for j in K:
                if T.A[i][j][k] != 0:
                    terms.append(momentum_product(a[i], b[j], h) * coeff(T.A[i][j][k], k))
        return terms

    flux_x = [ZERO] * n
    flux_x[0] = ha[0]
    for k in K:
        flux_x[ia[k]] = _sum(advective(ha, ha, k) + ([p] if k == 0 else []))
        if dimension == 2:
            flux_x[ib[k]] = _sum(advective(ha, hb, k))
    flux = [tuple(flux_x)]
    if dimension == 2:
        flux_y = [ZERO] * n
        flux_y[0] = hb[0]
        for k in K:
            flux_y[ia[k]] = _sum(advective(hb, ha, k))
            flux_y[ib[k]] = _sum(advective(hb, hb, k) + ([p] if k == 0 else []))
        flux.append(tuple(flux_y))

    def vertical_coupling(rows, mean, moments, cols):
        """Matrix for d/dx_d: -mean on the diagonal plus sum_i moment_i B_kij / M_k."""
        m = [[[] for _ in range(n)] for _ in range(n)]
        for k in K:
            if k == 0:
                continue
            m[rows[k]][cols[k]].append(-mean)
            for j in K:
                if j == 0:
                    continue
                for i in K:
                    if i >= 1 and T.B[k][i][j] != 0:
                        m[rows[k]][cols[j]].append(moments[i] / h * coeff(T.B[k][i][j], k))
        return m

    def assemble(*parts):
        out = [[[] for _ in range(n)] for _ in range(n)]
        for part in parts:
            for r in range(n):
                for c in range(n):
                    out[r][c].extend(part[r][c])
        return tuple(tuple(_sum(out[r][c]) for c in range(n)) for r in range(n))

    um = ha[0] / h
    nc = [assemble(vertical_coupling(ia, um, ha, ia))]
    if dimension == 2:
        vm = hb[0] / h
        nc[0] = assemble(vertical_coupling(ia, um, ha, ia), vertical_coupling(ib, vm, hb, ia))
        nc.append(assemble(vertical_coupling(ia, um, ha, ib), vertical_coupling(ib, vm, hb, ib)))

    def friction(moments, k):
        newton = [moments[i] / h * coeff(T.D[i][k], k) for i in K if T.D[i][k] != 0]
        terms = []
        if newton:
            terms.append(-(NU / h) * _sum(newton))
        if T.phi0[k] != 0:
            ub = _sum([moments[i] / h * Const(T.phi0[i]) for i in K])
            terms.append(-(CS / R) * ub * coeff(T.phi0[k], k))
        return _sum(terms)

    source = [ZERO] * n
    for k in K:
        source[ia[k]] = friction(ha, k)
        if dimension == 2:
            source[ib[k]] = friction(hb, k)

    zeta = minimum(L.z / h, 1)

    def profile(moments):
        return _sum([moments[i] / h * poly_expr(legendre_shifted(i).coeffs, zeta) for i in K])

    if dimension == 1:
        updates = (AuxUpdate("dudx", um, (1,)),)
        lift = _lift_columns(L, h, profile(ha), ZERO, L.a("dudx"), R, G)
    else:
        updates = (AuxUpdate("dudx", um, (1, 0)), AuxUpdate("dvdy", hb[0] / h, (0, 1)))
        lift = _lift_columns(L, h, profile(ha), profile(hb), L.a("dudx") + L.a("dvdy"), R, G)
    return ModelDef(
        name="sme",
        layout=L,
        flux=tuple(flux),
        nonconservative=tuple(nc),
        source=tuple(source),
        initial_condition=(1,) + (0,) * (n - 1),
        aux_updates=updates,
        reconstruction_degree=1,
        lift=lift,
    )
