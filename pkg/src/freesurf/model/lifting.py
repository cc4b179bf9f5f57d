"""Reconstruct vertical (rho, u, v, w, p) columns from a depth-averaged state."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..mesh import Mesh
from .core import ModelDef, UnsupportedOperationError, as_params, coords_array

Z_MAX_FACTOR = 1.2


@dataclass(frozen=True)
class LiftedColumn:
    z: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    p: np.ndarray


def lift_samples(model: ModelDef, mesh: Mesh, Q, Qaux, nz: int, params=None):
    """Arrays (z levels, values) with values shaped (5, n_inner, nz)."""
    if model.lift is None:
        raise UnsupportedOperationError(f"model {model.name!r} has no lifting map")
    if nz < 2:
        raise ValueError("need at least two vertical levels")
    params = as_params(model, params)
    n = mesh.n_inner
    Q = np.asarray(Q, dtype=float)[:, :n]
    Qaux = np.asarray(Qaux, dtype=float)[:, :n]
    h = Q[model.depth_field]
    z = np.linspace(0.0, Z_MAX_FACTOR * float(np.max(h)), nz)
    Qc = np.repeat(Q[:, :, None], nz, axis=2).reshape(Q.shape[0], -1)
    Ac = np.repeat(Qaux[:, :, None], nz, axis=2).reshape(Qaux.shape[0], -1)
    pts = np.repeat(mesh.centroids[:n], nz, axis=0)
    X = coords_array(pts)
    X[2] = np.tile(z, n)
    vals = model.kernels.lift(0.0, X, Qc, Ac, params)
    return z, vals.reshape(5, n, nz)


def lift_to_3d(model: ModelDef, mesh: Mesh, Q, Qaux, nz: int, params=None) -> List[LiftedColumn]:
    z, vals = lift_samples(model, mesh, Q, Qaux, nz, params)
    if not np.all(np.isfinite(vals)):
        raise ValueError("lifted samples are not finite")
    return [LiftedColumn(z, *(vals[k, i] for k in range(5))) for i in range(mesh.n_inner)]
