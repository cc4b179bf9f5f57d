"""Path-conservative Rusanov finite-volume step and CFL time step."""
from __future__ import annotations

import numpy as np

from ..mesh import Mesh
from ..model import ModelDef, as_params, max_wave_speed

QUIESCENT_SPEED = 1e-12


class StepError(RuntimeError):
    def __init__(self, message, cell=None):
        self.cell = cell
        super().__init__(message)


def _normal_flux(model: ModelDef, Q, Qaux, params, normals):
    out = np.zeros_like(Q)
    for d in range(model.dimension):
        out += model.kernels.flux(d)(0.0, None, Q, Qaux, params) * normals[d]
    return out


def _normal_nc(model: ModelDef, Q, Qaux, params, normals):
    n = model.n_fields
    out = np.zeros((n * n, Q.shape[1]))
    for d in range(model.dimension):
        out += model.kernels.nonconservative(d)(0.0, None, Q, Qaux, params) * normals[d]
    return out.reshape(n, n, -1)


def face_fluctuations(model: ModelDef, Q_L, Q_R, Qaux_L, Qaux_R, params, n):
    """Left and right fluctuations (dL, dR) across faces with unit normal ``n`` (L -> R).

    Accepts a single face (1-D state vectors, ``n`` of length dim) or a batch
    (states shaped (n_fields, n_faces), ``n`` shaped (dim, n_faces)).
    """
    params = as_params(model, params)
    single = np.ndim(Q_L) == 1
    QL = np.asarray(Q_L, dtype=float).reshape(model.n_fields, -1)
    QR = np.asarray(Q_R, dtype=float).reshape(model.n_fields, -1)
    m = QL.shape[1]
    AL = np.zeros((model.n_aux, m)) if Qaux_L is None else np.asarray(Qaux_L, dtype=float).reshape(model.n_aux, m)
    AR = np.zeros((model.n_aux, m)) if Qaux_R is None else np.asarray(Qaux_R, dtype=float).reshape(model.n_aux, m)
    normals = np.asarray(n, dtype=float)
    if normals.ndim == 1:
        normals = np.repeat(normals[:, None], m, axis=1)
    FL = _normal_flux(model, QL, AL, params, normals)
    FR = _normal_flux(model, QR, AR, params, normals)
    s = np.maximum(max_wave_speed(model, QL, AL, params, normals),
                   max_wave_speed(model, QR, AR, params, normals))
    dQ = QR - QL
    Fhat = 0.5 * (FL + FR) - 0.5 * s * dQ
    Nn = _normal_nc(model, 0.5 * (QL + QR), 0.5 * (AL + AR), params, normals)
    ncq = np.einsum("ijf,jf->if", Nn, dQ)
    dL = Fhat - FL + 0.5 * ncq
    dR = Fhat - FR - 0.5 * ncq
    if single:
        return dL[:, 0], dR[:, 0]
    return dL, dR


def hyperbolic_step(mesh: Mesh, model: ModelDef, Q, Qaux, params, dt) -> np.ndarray:
    """Forward-Euler update of inner cells; ghost columns are returned unchanged."""
    params = as_params(model, params)
    Q = np.asarray(Q, dtype=float)
    Qaux = np.asarray(Qaux, dtype=float)
    L = mesh.face_cells[:, 0]
    R = mesh.face_cells[:, 1]
    normals = mesh.face_normals.T
    dL, dR = face_fluctuations(model, Q[:, L], Q[:, R], Qaux[:, L], Qaux[:, R], params, normals)
    upd = np.zeros_like(Q)
    np.add.at(upd.T, L, -(dt * mesh.face_areas / mesh.volumes[L] * dL).T)
    inner = R < mesh.n_inner
    np.add.at(upd.T, R[inner], (dt * mesh.face_areas[inner] / mesh.volumes[R[inner]] * dR[:, inner]).T)
    out = Q.copy()
    out[:, : mesh.n_inner] += upd[:, : mesh.n_inner]
    bad = ~np.all(np.isfinite(out[:, : mesh.n_inner]), axis=0)
    if np.any(bad):
        cell = int(np.argmax(bad))
        raise StepError(f"non-finite state after hyperbolic step in cell {cell}", cell)
    return out


def cell_lengths(mesh: Mesh) -> np.ndarray:
    n = mesh.n_inner
    if mesh.dimension == 1:
        return mesh.volumes[:n].copy()
    perim = np.zeros(n)
    for f, (left, right) in enumerate(mesh.face_cells):
        perim[left] += mesh.face_areas[f]
        if right < n:
            perim[right] += mesh.face_areas[f]
    return mesh.volumes[:n] / perim


def cell_speeds(mesh: Mesh, model: ModelDef, Q, Qaux, params) -> np.ndarray:
    """max |lambda| of each inner cell's own state over its face normals."""
    params = as_params(model, params)
    n = mesh.n_inner
    counts = np.diff(mesh.cell_face_offsets)
    cells = np.repeat(np.arange(n), counts)
    faces = mesh.cell_face_ids
    speeds = max_wave_speed(model, np.asarray(Q)[:, cells], np.asarray(Qaux)[:, cells], params,
                            mesh.face_normals[faces].T)
    if not np.all(np.isfinite(speeds)):
        raise StepError("non-finite wave speed")
    s = np.zeros(n)
    np.maximum.at(s, cells, speeds)
    return s


def compute_dt(mesh: Mesh, model: ModelDef, Q, Qaux, params, cfl: float) -> float:
    ell = cell_lengths(mesh)
    s = cell_speeds(mesh, model, Q, Qaux, params)
    if np.all(s < QUIESCENT_SPEED):
        return float(cfl * ell.min())
    with np.errstate(divide="ignore"):
        ratio = np.where(s >= QUIESCENT_SPEED, ell / s, np.inf)
    return float(cfl * ratio.min())
