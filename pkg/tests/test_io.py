import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freesurf.expr import parse
from freesurf.io import (
    CheckpointError,
    SolverState,
    checkpoint_read,
    checkpoint_write,
    read_csv_1d,
    read_vtk_counts,
    write_csv_1d,
    write_lifted_vtk,
    write_vtk,
)
from freesurf.mesh import parse_msh_text, uniform_interval
from freesurf.model import UnsupportedOperationError, extrapolation, poisson_model, sme_model, swe_model
from freesurf.solver import Snapshot, SolverSettings, transient_hyperbolic_solve

from meshes import TWO_TRIANGLES_MSH, perturbed_triangles


def snap(Q, Qaux=None, names=("h",), aux=(), t=0.0, step=0):
    Q = np.atleast_2d(np.asarray(Q, float))
    Qaux = np.zeros((len(aux), Q.shape[1])) if Qaux is None else np.atleast_2d(np.asarray(Qaux, float))
    return Snapshot(t, step, Q, Qaux, tuple(names), tuple(aux))


# --- VTK -----------------------------------------------------------------------

def test_vtk_two_triangles(tmp_path):
    mesh = parse_msh_text(TWO_TRIANGLES_MSH)
    p = write_vtk(mesh, snap([1.0, 2.0]), tmp_path / "a.vtk")
    text = p.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "DATASET UNSTRUCTURED_GRID" in text and "CELL_DATA 2" in text
    block = text.split("SCALARS h double 1\nLOOKUP_TABLE default\n")[1].split("\n")
    assert block[:2] == ["1", "2"]
    types = text.split("CELL_TYPES 2\n")[1].split("\n")[:2]
    assert types == ["5", "5"]


def test_vtk_geometry_only(tmp_path):
    mesh = parse_msh_text(TWO_TRIANGLES_MSH)
    p = write_vtk(mesh, snap(np.zeros((0, 2)), names=()), tmp_path / "g.vtk")
    counts = read_vtk_counts(p)
    assert counts["points"] == 4 and counts["cells"] == 2 and counts["cell_data"] is None


def test_vtk_counts_exclude_ghosts(tmp_path):
    mesh = perturbed_triangles()
    n = mesh.n_inner
    h = np.arange(n, dtype=float) / 7
    p = write_vtk(mesh, snap(np.vstack([h, -h]), names=("h", "hu"), aux=("dudx",), Qaux=[h * 0]), tmp_path / "m.vtk")
    c = read_vtk_counts(p)
    assert c["points"] == len(mesh.nodes) and c["cells"] == n and c["cell_data"] == n
    assert np.array_equal(c["scalars"]["h"], h) and set(c["scalars"]) == {"h", "hu", "dudx"}


def test_vtk_mixed_cells(tmp_path):
    import runpy

    ns = runpy.run_path(str(__import__("pathlib").Path(__file__).parents[1] / "demos" / "make_channel_mesh.py"),
                        run_name="not_main")
    mesh = parse_msh_text(ns["channel_msh"](4, 2))
    p = write_vtk(mesh, snap(np.ones((1, mesh.n_inner))), tmp_path / "c.vtk")
    types = p.read_text().split(f"CELL_TYPES {mesh.n_inner}\n")[1].split("\n")[: mesh.n_inner]
    assert set(types) == {"5", "9"}


def test_vtk_rejects_1d(tmp_path):
    with pytest.raises(ValueError):
        write_vtk(uniform_interval(0, 1, 3), snap([1, 2, 3]), tmp_path / "x.vtk")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_csv_1d(uniform_interval(0, 1, 2), snap([1, 2]), tmp_path / "missing" / "x.csv")


# --- CSV -----------------------------------------------------------------------

def test_csv_layout(tmp_path):
    mesh = uniform_interval(0, 1, 4)
    p = write_csv_1d(mesh, snap([1.0, 2.0, 3.0, 4.0], names=("T",)), tmp_path / "t.csv")
    lines = p.read_text().splitlines()
    assert len(lines) == 5 and lines[0] == "x,T"
    x = [float(l.split(",")[0]) for l in lines[1:]]
    assert all(a < b for a, b in zip(x, x[1:]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=6, max_size=6))
def test_csv_round_trip_is_bit_exact(tmp_path_factory, vals):
    mesh = uniform_interval(-1, 2, 6)
    p = write_csv_1d(mesh, snap(vals, names=("q",)), tmp_path_factory.mktemp("csv") / "q.csv")
    names, cols = read_csv_1d(p)
    assert names == ["x", "q"]
    assert np.array_equal(cols[1], np.array(vals)) and np.array_equal(cols[0], mesh.centroids[:6, 0])


def test_csv_sorts_by_centroid(tmp_path):
    from freesurf.mesh import build_mesh_1d

    mesh = build_mesh_1d(np.array([0.0, 2.0, 1.0]), [(0, 2), (2, 1)], {0: "left", 1: "right"})
    p = write_csv_1d(mesh, snap([10.0, 20.0]), tmp_path / "s.csv")
    names, cols = read_csv_1d(p)
    assert np.array_equal(cols[0], [0.5, 1.5]) and np.array_equal(cols[1], [10.0, 20.0])


# --- lifted VTK ----------------------------------------------------------------

def test_lifted_swe_1d(tmp_path):
    mesh = uniform_interval(0, 1, 3)
    m = swe_model(1)
    s = snap([[1.0, 2.0, 0.5], [0.3, 0.6, 0.15]], names=m.field_names, aux=m.aux_names, Qaux=[[0.0] * 3])
    nz = 4
    p = write_lifted_vtk(mesh, m, s, nz, tmp_path / "l.vtk")
    c = read_vtk_counts(p)
    assert c["cells"] == 3 * (nz - 1) and c["points"] == 3 * 2 * nz
    text = p.read_text()
    vec = text.split("VECTORS velocity double\n")[1].split("\n")[: c["points"]]
    u = np.array([[float(v) for v in row.split()] for row in vec])
    # two nodes per level, nz levels, per column; every column has u = 0.3
    assert np.allclose(u[:, 0], 0.3, rtol=1e-15)
    pr = c["scalars"]["p"].reshape(3, nz, 2)
    h = np.array([1.0, 2.0, 0.5])
    assert np.allclose(pr[:, 0, 0], 1000 * 9.81 * h, rtol=1e-12)


def test_lifted_minimal_extrusion_2d(tmp_path):
    mesh = parse_msh_text(TWO_TRIANGLES_MSH)
    m = sme_model(2, 1)
    Q = np.array([[1.0, 1.5], [0.2, 0.3], [0.1, 0.0], [0.0, 0.0], [0.0, 0.1]])
    s = snap(Q, names=m.field_names, aux=m.aux_names, Qaux=np.zeros((m.n_aux, 2)))
    p = write_lifted_vtk(mesh, m, s, 2, tmp_path / "w.vtk")
    c = read_vtk_counts(p)
    assert c["cells"] == mesh.n_inner
    assert p.read_text().split("CELL_TYPES 2\n")[1].split("\n")[:2] == ["13", "13"]


def test_lifted_requires_map(tmp_path):
    mesh = uniform_interval(0, 1, 3)
    m = poisson_model()
    with pytest.raises(UnsupportedOperationError):
        write_lifted_vtk(mesh, m, snap([1, 2, 3], names=("T",), aux=("ddTdxx",), Qaux=[[0] * 3]), 3, tmp_path / "p.vtk")


# --- checkpoints -------------------------------------------------------------------

def _state(rng, nf=2, na=1, ni=5, ng=2):
    return SolverState("swe", ("h", "hu")[:nf], ("dudx",)[:na], ni,
                       rng.normal(size=(nf, ni + ng)), rng.normal(size=(na, ni + ng)))


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = _state(rng)
    s.Q[0, 0] = np.nextafter(1.0, 2.0)
    checkpoint_write(s, 0.1 + 0.2, 17, tmp_path / "c.meta")
    back, t, step = checkpoint_read(tmp_path / "c.meta")
    assert t == 0.1 + 0.2 and step == 17
    assert back.Q.tobytes() == s.Q.tobytes() and back.Qaux.tobytes() == s.Qaux.tobytes()
    assert back.field_names == s.field_names and back.n_inner == 5 and back.n_ghost == 2
    meta = (tmp_path / "c.meta").read_text()
    assert "endian LE" in meta and "version 1" in meta


def test_checkpoint_without_aux(tmp_path):
    s = SolverState("poisson", ("T",), (), 3, np.arange(5.0)[None, :], np.zeros((0, 5)))
    checkpoint_write(s, 0.0, 0, tmp_path / "p")
    back, _, _ = checkpoint_read(tmp_path / "p")
    assert back.Qaux.shape == (0, 5) and np.array_equal(back.Q, s.Q)


def test_truncated_blob(tmp_path):
    s = _state(np.random.default_rng(1))
    checkpoint_write(s, 1.0, 1, tmp_path / "c")
    blob = tmp_path / "c.bin"
    blob.write_bytes(blob.read_bytes()[:-8])
    with pytest.raises(CheckpointError, match="bytes"):
        checkpoint_read(tmp_path / "c")


def test_version_mismatch(tmp_path):
    s = _state(np.random.default_rng(2))
    checkpoint_write(s, 1.0, 1, tmp_path / "c")
    meta = tmp_path / "c"
    meta.write_text(meta.read_text().replace("version 1", "version 9"))
    with pytest.raises(CheckpointError, match="version"):
        checkpoint_read(meta)


def test_blob_is_little_endian_field_major(tmp_path):
    s = SolverState("m", ("a", "b"), ("c",), 2, np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[5.0, 6.0]]))
    checkpoint_write(s, 0.0, 0, tmp_path / "c")
    raw = np.frombuffer((tmp_path / "c.bin").read_bytes(), dtype="<f8")
    assert list(raw) == [1, 2, 3, 4, 5, 6]


# --- restart and determinism ----------------------------------------------------------

def dam_break_case():
    m = swe_model(1)
    m = m.with_initial_condition([parse("x < 5 ? 1 : 0.5", m.layout), 0]).with_bcs(
        extrapolation("left"), extrapolation("right"))
    return uniform_interval(0, 10, 100), m


def test_restart_equivalence(tmp_path):
    mesh, m = dam_break_case()
    fixed = dict(t_end=100.0, fixed_dt=0.004)
    full = transient_hyperbolic_solve(mesh, m, SolverSettings(max_steps=50, **fixed))
    half = transient_hyperbolic_solve(mesh, m, SolverSettings(max_steps=25, **fixed))
    checkpoint_write(SolverState.of(m, mesh, half.Q, half.Qaux), half.t, half.step, tmp_path / "r")
    state, t, step = checkpoint_read(tmp_path / "r")
    rest = transient_hyperbolic_solve(mesh, m, SolverSettings(max_steps=50, **fixed),
                                      Q0=state.Q, Qaux0=state.Qaux, t0=t, step0=step)
    assert rest.step == 50 and rest.t == full.t
    assert rest.Q.tobytes() == full.Q.tobytes()


def test_writers_are_deterministic(tmp_path):
    mesh, m = dam_break_case()
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        res = transient_hyperbolic_solve(mesh, m, SolverSettings(t_end=0.2))
        s = Snapshot(res.t, res.step, res.Q[:, :100], res.Qaux[:, :100], m.field_names, m.aux_names)
        write_csv_1d(mesh, s, d / "a.csv")
        write_lifted_vtk(mesh, m, s, 3, d / "a.vtk")
        checkpoint_write(SolverState.of(m, mesh, res.Q, res.Qaux), res.t, res.step, d / "c")
        outs.append([(d / f).read_bytes() for f in ("a.csv", "a.vtk", "c", "c.bin")])
    assert outs[0] == outs[1]
    tri = perturbed_triangles()
    a = write_vtk(tri, snap(np.ones((1, tri.n_inner))), tmp_path / "x.vtk").read_bytes()
    b = write_vtk(tri, snap(np.ones((1, tri.n_inner))), tmp_path / "y.vtk").read_bytes()
    assert a == b
