import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freesurf.expr import VariableLayout, free_vars, parse
from freesurf.mesh import uniform_interval
from freesurf.model import (
    BoundaryConfigError,
    HyperbolicityError,
    ModelError,
    UnsupportedOperationError,
    coords_array,
    eigenvalue_stack,
    extrapolation,
    fill_ghosts,
    lift_samples,
    lift_to_3d,
    periodic_pair,
    poisson_model,
    prescribe,
    quasilinear_eigenvalues,
    sme_model,
    swe_model,
    vam_models,
)
from freesurf.model.core import ModelDef
from freesurf.solver import AuxUpdater

from meshes import perturbed_triangles

RNG = np.random.default_rng(11)


def random_states(n_fields, count, dim, rng=RNG):
    Q = np.empty((n_fields, count))
    Q[0] = rng.uniform(0.1, 10, count)
    Q[1:] = rng.uniform(-5, 5, (n_fields - 1, count)) * Q[0]
    return Q


def X0(n):
    return np.zeros((4, n))


# --- SWE -----------------------------------------------------------------------

def test_swe_flux_value():
    m = swe_model(1)
    out = m.kernels.flux(0)(0.0, None, np.array([2.0, 0.0]), np.zeros(1), m.default_params())
    assert out[0] == 0.0 and out[1] == pytest.approx(19.62, rel=1e-15)


def test_swe_eigenvalues_2d():
    m = swe_model(2)
    lam = quasilinear_eigenvalues(m, [1.0, 0.0, 0.0], None, {"g": 1.0}, [1.0, 0.0], method="closed")
    assert np.allclose(lam, [-1, 0, 1], atol=0)
    num = quasilinear_eigenvalues(m, [1.0, 0.0, 0.0], None, {"g": 1.0}, [1.0, 0.0], method="numeric")
    assert np.allclose(num, [-1, 0, 1], atol=1e-10)


def test_invalid_dimension():
    with pytest.raises((ValueError, ModelError)):
        swe_model(3)
    with pytest.raises((ValueError, ModelError)):
        sme_model(1, -1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0.1, 10), st.floats(-5, 5), st.floats(-5, 5))
def test_swe_eigenvalues_rotation_invariant(theta, h, u, v):
    m = swe_model(2)
    n = np.array([1.0, 0.0])
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    uv = R @ [u, v]
    a = quasilinear_eigenvalues(m, [h, h * u, h * v], None, None, n)
    b = quasilinear_eigenvalues(m, [h, h * uv[0], h * uv[1]], None, None, R @ n)
    assert np.allclose(a, b, atol=1e-12 * max(1.0, np.abs(a).max()))


# --- SME -----------------------------------------------------------------------

@pytest.mark.parametrize("dim", [1, 2])
def test_sme_level0_matches_swe(dim):
    swe, sme = swe_model(dim), sme_model(dim, 0)
    assert sme.field_names == swe.field_names or len(sme.field_names) == len(swe.field_names)
    Q = random_states(swe.n_fields, 100, dim)
    A = np.zeros((swe.n_aux, 100))
    ps, pm = swe.default_params(), sme.default_params()
    for d in range(dim):
        assert np.allclose(swe.kernels.flux(d)(0, None, Q, A, ps), sme.kernels.flux(d)(0, None, Q, A, pm),
                           rtol=1e-13, atol=1e-13)
        assert np.allclose(swe.kernels.nonconservative(d)(0, None, Q, A, ps),
                           sme.kernels.nonconservative(d)(0, None, Q, A, pm), rtol=1e-13, atol=1e-13)
    assert np.allclose(swe.kernels.source(0, None, Q, A, ps), sme.kernels.source(0, None, Q, A, pm), atol=1e-13)


def test_sme_level0_flux_structure():
    swe, sme = swe_model(1), sme_model(1, 0)
    # same symbols in the same slots; only the parameter vector differs
    for a, b in zip(swe.flux[0], sme.flux[0]):
        slots_a = {(v.kind, v.index) for v in free_vars(a) if v.kind != "param"}
        slots_b = {(v.kind, v.index) for v in free_vars(b) if v.kind != "param"}
        assert slots_a == slots_b


def test_sme_nc_diagonal():
    m = sme_model(1, 1)
    Q = np.array([2.0, 4.0, 0.0])
    nc = m.kernels.nonconservative(0)(0, None, Q, np.zeros(m.n_aux), m.default_params()).reshape(3, 3)
    assert nc[2, 2] == -2.0


def test_sme_source_at_rest_and_inviscid():
    m = sme_model(2, 2, nu=0.7, C=3.0)
    Q = np.zeros((m.n_fields, 4))
    Q[0] = 1.5
    assert np.all(m.kernels.source(0, None, Q, np.zeros((m.n_aux, 4)), m.default_params()) == 0)
    free = sme_model(1, 3, nu=0.0, C=0.0)
    Q = random_states(free.n_fields, 100, 1)
    S = free.kernels.source(0, None, Q, np.zeros((free.n_aux, 100)), free.default_params())
    assert np.all(S == 0)


def test_sme_source_signs():
    """Bulk viscosity leaves the mean alone; slip friction opposes bottom velocity."""
    m = sme_model(1, 1, nu=0.1, C=5.0, rho=1.0)
    Q = np.array([1.0, 1.0, 0.5])  # u_b = alpha0 - alpha1 = 0.5
    S = m.kernels.source(0, None, Q, np.zeros(m.n_aux), m.default_params())
    assert S[1] == pytest.approx(-5.0 * 0.5, rel=1e-14)
    # row 1: -(nu/h) alpha1 D11/M11 - C u_b phi1(0)/M11 = -0.1*0.5*4*3 + 5*0.5*3
    assert S[2] == pytest.approx(-0.1 * 0.5 * 4 * 3 + 5.0 * 0.5 * 3, rel=1e-14)


def test_sme_at_rest_symmetric_spectrum():
    m = sme_model(1, 1)
    lam = quasilinear_eigenvalues(m, [1.3, 0.0, 0.0], None, None, [1.0], method="numeric")
    assert np.allclose(lam, -lam[::-1], atol=1e-10)
    # characteristic polynomial oracle: A = [[0,1,0],[gh,0,0],[0,0,0]] -> +-sqrt(gh), 0
    assert np.allclose(lam, [-np.sqrt(9.81 * 1.3), 0, np.sqrt(9.81 * 1.3)], atol=1e-10)


def test_sme_level1_moving_spectrum():
    m = sme_model(1, 1)
    h, um, a1 = 0.8, 0.3, 0.2
    lam = quasilinear_eigenvalues(m, [h, h * um, h * a1], None, None, [1.0], method="numeric")
    c = np.sqrt(9.81 * h + a1**2)
    assert np.allclose(lam, [um - c, um, um + c], atol=1e-10)


def test_zero_system_has_zero_spectrum():
    L = VariableLayout(("a", "b"), (), (), 1)
    m = ModelDef("zero", L)
    assert np.all(quasilinear_eigenvalues(m, [1.0, 2.0], None, None, [1.0]) == 0)


def test_complex_spectrum_is_reported():
    L = VariableLayout(("a", "b"), (), (), 1)
    a, b = L.Q
    m = ModelDef("rotation", L, flux=((b, -a),))
    with pytest.raises(HyperbolicityError, match="hyperbolicity"):
        quasilinear_eigenvalues(m, [1.0, 0.0], None, None, [1.0])


def test_eigen_direction_must_be_unit():
    with pytest.raises(ValueError):
        quasilinear_eigenvalues(swe_model(2), [1, 0, 0], None, None, [1.0, 1.0])


# --- VAM -----------------------------------------------------------------------

def test_vam_predictor_values():
    p, _ = vam_models()
    n = 3
    Q = np.vstack([np.array([2.0, 1.0, 3.0]), np.zeros((4, n))])
    A = np.zeros((p.n_aux, n))
    prm = p.default_params()
    assert np.all(p.kernels.source(0, None, Q, A, prm) == 0)
    assert np.all(p.kernels.flux(0)(0, None, Q, A, prm) == 0)
    nc = p.kernels.nonconservative(0)(0, None, Q, A, prm).reshape(5, 5, n)
    assert nc[1, 0, 0] == pytest.approx(19.62, rel=1e-15)
    k = [u.target for u in p.aux_updates].index("w2")
    w2 = p.kernels.aux_update(k)
    assert np.all(w2(0, None, Q, A, prm) == 0)


def test_vam_w2_closure_value():
    p, _ = vam_models()
    k = [u.target for u in p.aux_updates].index("w2")
    Q = np.array([[2.0], [2.0], [1.0], [0.4], [0.2]])  # u0=1, u1=0.5, w0=0.2, w1=0.1
    A = np.zeros((p.n_aux, 1))
    A[p.aux_names.index("dbdx")] = 0.3
    val = p.kernels.aux_update(k)(0, None, Q, A, p.default_params())[0, 0]
    assert val == pytest.approx(-(0.2 + 0.1) + 1.5 * 0.3, rel=1e-15)


def _corrector_two_step(a, p0, p1, dt):
    """Evaluate S^P, form U = Q* + dt S^P with hand-derived x-derivatives, then R0, R1."""
    h, hu0, hu1, hw0, hw1 = a["h"], a["hu0"], a["hu1"], a["hw0"], a["hw1"]
    h1, h2 = a["dhdx"], a["d2hdx2"]
    b1, b2 = a["dbdx"], a["d2bdx2"]
    q1, q2 = a["dp0dx"], a["d2p0dx2"]
    r1, r2 = a["dp1dx"], a["d2p1dx2"]
    S = [0.0,
         h1 * p0 + h * q1 + 2 * p1 * b1,
         -(3 * p0 - p1) * h1 - 6 * (p0 - p1) * b1,
         2 * p1,
         6 * (p0 - p1)]
    dS1 = h2 * p0 + 2 * h1 * q1 + h * q2 + 2 * r1 * b1 + 2 * p1 * b2
    dS2 = -(3 * q1 - r1) * h1 - (3 * p0 - p1) * h2 - 6 * (q1 - r1) * b1 - 6 * (p0 - p1) * b2
    U = [q + dt * s for q, s in zip((h, hu0, hu1, hw0, hw1), S)]
    dU = [h1, a["dhu0dx"] + dt * dS1, a["dhu1dx"] + dt * dS2]
    H, u0, u1, w0, w1 = U[0], U[1] / U[0], U[2] / U[0], U[3] / U[0], U[4] / U[0]
    du0 = (dU[1] - u0 * dU[0]) / H
    R0 = H * du0 + dU[2] / 3 + u1 * dU[0] / 3 + 2 * (w0 - u0 * b1)
    R1 = H * du0 + u1 * dU[0] + 2 * (u1 * b1 - w1)
    return R0, R1


def test_vam_corrector_matches_two_step_evaluation():
    _, c = vam_models()
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = {k: rng.uniform(-1, 1) for k in c.aux_names}
        a["h"] = rng.uniform(0.5, 2)
        p0, p1, dt = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 0.1)
        A = np.array([[a[k]] for k in c.aux_names])
        prm = c.params(dt=dt)
        got = c.kernels.residual(0, None, np.array([[p0], [p1]]), A, prm)[:, 0]
        ref = _corrector_two_step(a, p0, p1, dt)
        assert np.allclose(got, ref, rtol=1e-13, atol=1e-13)


# --- Poisson -------------------------------------------------------------------

def test_poisson_residual_values():
    m = poisson_model()
    R = m.kernels.residual(0, None, np.zeros((1, 2)), np.array([[2.0, 0.0]]), m.default_params())
    assert R[0, 0] == 0.0 and R[0, 1] == 2.0


def test_poisson_exact_field_has_small_residual():
    m = poisson_model()
    mesh = uniform_interval(0, 1, 40)
    x = mesh.centroids[:, 0].copy()
    # Dirichlet ghosts carry the face value
    x[mesh.n_inner :] = mesh.face_centers[mesh.boundary_faces, 0]
    Q = (x**2 + 1)[None, :]
    A = AuxUpdater(m, mesh)(0, Q, np.zeros((1, mesh.n_cells)), None)
    R = m.kernels.residual(0, None, Q, A, m.default_params())
    assert np.abs(R[0, : mesh.n_inner]).max() <= 1e-10


# --- layout audit --------------------------------------------------------------

@pytest.mark.parametrize(
    "model, symbols",
    [
        (swe_model(2), {"h", "hu", "hv", "g", "rho"}),
        (sme_model(2, 2), {"h", "ha0", "ha1", "ha2", "hb0", "hb1", "hb2", "g", "rho", "nu", "C"}),
        (vam_models()[0], {"h", "hu0", "hu1", "hw0", "hw1", "w2", "p0", "p1", "b", "g"}),
        (vam_models()[1], {"p0", "p1", "h", "hu0", "hu1", "hw0", "hw1", "b", "g", "dt"}),
        (poisson_model(), {"T"}),
    ],
)
def test_layout_houses_each_symbol_once(model, symbols):
    L = model.layout
    slots = list(L.states) + list(L.aux) + list(L.param_names)
    for s in symbols:
        assert slots.count(s) == 1, s
    for e in model.all_expressions() if hasattr(model, "all_expressions") else ():
        for v in free_vars(e):
            assert L.contains(v)


# --- boundary conditions ---------------------------------------------------------

def _interval_state(model, mesh, rng=RNG):
    Q = rng.uniform(0.5, 1.5, (model.n_fields, mesh.n_cells))
    return Q, np.zeros((model.n_aux, mesh.n_cells))


def test_extrapolation_copies_owner():
    mesh = uniform_interval(0, 1, 5)
    m = swe_model(1).with_bcs(extrapolation("left"), extrapolation("right"))
    Q, A = _interval_state(m, mesh)
    out = fill_ghosts(m, mesh, 0, Q, A)
    assert np.array_equal(out[:, mesh.n_inner :], Q[:, mesh.ghost_owner])


def test_prescribed_discharge():
    mesh = uniform_interval(0, 1, 5)
    m = swe_model(1).with_bcs(prescribe("left", {1: 0.1}), extrapolation("right"))
    Q, A = _interval_state(m, mesh)
    out = fill_ghosts(m, mesh, 0, Q, A)
    g = mesh.n_inner + mesh.boundary_index[int(mesh.tag_faces["left"][0])]
    assert out[1, g] == 0.1
    assert out[0, g] == Q[0, 0]


def test_periodic_interval():
    mesh = uniform_interval(0, 1, 6)
    m = swe_model(1).with_bcs(periodic_pair("left", "right"))
    Q, A = _interval_state(m, mesh)
    out = fill_ghosts(m, mesh, 0, Q, A)
    gl = mesh.n_inner + mesh.boundary_index[int(mesh.tag_faces["left"][0])]
    gr = mesh.n_inner + mesh.boundary_index[int(mesh.tag_faces["right"][0])]
    assert np.array_equal(out[:, gl], Q[:, mesh.n_inner - 1])
    assert np.array_equal(out[:, gr], Q[:, 0])


def test_periodic_2d_matches_positions():
    mesh = perturbed_triangles()
    m = swe_model(2).with_bcs(periodic_pair("left", "right"), periodic_pair("bottom", "top"))
    Q, A = _interval_state(m, mesh)
    out = fill_ghosts(m, mesh, 0, Q, A)
    for k, f in enumerate(mesh.boundary_faces):
        if mesh.boundary_tags[k] == "left":
            g = mesh.n_inner + k
            src = np.flatnonzero((out[0, : mesh.n_inner] == out[0, g]))
            assert len(src) == 1
            assert mesh.centroids[src[0], 0] > 5.0  # the partner lies along the right side


def test_fill_ghosts_idempotent():
    mesh = uniform_interval(0, 1, 6)
    base = swe_model(1)
    m = base.with_bcs(prescribe("left", {1: parse("t + x + 2*h", base.layout)}), extrapolation("right"))
    Q, A = _interval_state(m, mesh)
    once = fill_ghosts(m, mesh, 0.5, Q, A)
    assert np.array_equal(once, fill_ghosts(m, mesh, 0.5, once, A))


def test_tag_mismatch_lists_both_sets():
    mesh = uniform_interval(0, 1, 4, "inflow", "outflow")
    m = swe_model(1).with_bcs(extrapolation("inflw"), extrapolation("outflow"))
    with pytest.raises(BoundaryConfigError) as info:
        fill_ghosts(m, mesh, 0, *(_interval_state(m, mesh)))
    assert "inflow" in str(info.value) and "inflw" in str(info.value)


def test_unpaired_periodic_rejected():
    with pytest.raises(ModelError):
        swe_model(1).with_bcs(extrapolation("left"), periodic_pair("left", "right")[1])


# --- lifting -------------------------------------------------------------------

def test_swe_lift_profiles():
    mesh = uniform_interval(0, 1, 3)
    m = swe_model(1)
    Q = np.array([[1.0] * mesh.n_cells, [2.0] * mesh.n_cells])
    A = np.zeros((m.n_aux, mesh.n_cells))
    cols = lift_to_3d(m, mesh, Q, A, 7)
    for c in cols:
        assert np.all(c.u == 2.0)
        assert c.p[0] == pytest.approx(9810.0, rel=1e-15)
        assert c.z[-1] == pytest.approx(1.2)
        assert np.all(c.rho[c.z <= 1.0] == 1000.0) and np.all(c.rho[c.z > 1.0] == 0.0)


def test_sme_lift_bottom_velocity():
    mesh = uniform_interval(0, 1, 2)
    m = sme_model(1, 1)
    Q = np.array([[2.0] * mesh.n_cells, [2.0 * 0.7] * mesh.n_cells, [2.0 * 0.3] * mesh.n_cells])
    cols = lift_to_3d(m, mesh, Q, np.zeros((m.n_aux, mesh.n_cells)), 5)
    assert cols[0].u[0] == pytest.approx(0.7 - 0.3, rel=1e-15)


def test_lift_requires_map():
    mesh = uniform_interval(0, 1, 2)
    m = poisson_model()
    with pytest.raises(UnsupportedOperationError):
        lift_samples(m, mesh, np.ones((1, mesh.n_cells)), np.zeros((1, mesh.n_cells)), 3)
