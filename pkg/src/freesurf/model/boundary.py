"""Ghost-cell filling from a model's boundary conditions."""
from __future__ import annotations

from typing import Dict, List

import numpy as np

from ..mesh import Mesh
from .core import ModelDef, ModelError, as_params, coords_array


class BoundaryConfigError(ModelError):
    pass


def _periodic_sources(mesh: Mesh, tag: str, partner: str) -> np.ndarray:
    """For each face of ``tag``, the inner cell owning the matching face of ``partner``."""
    fa = mesh.tag_faces[tag]
    fb = mesh.tag_faces[partner]
    if len(fa) != len(fb):
        raise BoundaryConfigError(
            f"periodic tags {tag!r} and {partner!r} have {len(fa)} and {len(fb)} faces"
        )
    ca = mesh.face_centers[fa]
    cb = mesh.face_centers[fb]
    shift = cb.mean(axis=0) - ca.mean(axis=0)
    dist = np.linalg.norm((ca + shift)[:, None, :] - cb[None, :, :], axis=2)
    match = np.argmin(dist, axis=1)
    if len(set(match.tolist())) != len(match):
        raise BoundaryConfigError(f"periodic faces of {tag!r} and {partner!r} do not pair up")
    scale = max(np.ptp(mesh.face_centers, axis=0).max(), 1.0)
    if np.max(dist[np.arange(len(fa)), match]) > 1e-8 * scale:
        raise BoundaryConfigError(f"periodic faces of {tag!r} and {partner!r} are not translates")
    return mesh.face_cells[fb[match], 0]


class BoundaryOperator:
    """Precomputed ghost-filling rule for a (model, mesh) pair."""

    def __init__(self, model: ModelDef, mesh: Mesh):
        self.model = model
        self.mesh = mesh
        mesh_tags = set(mesh.tag_faces)
        bc_tags = {bc.tag for bc in model.boundary_conditions}
        if mesh_tags != bc_tags:
            raise BoundaryConfigError(
                "boundary tags do not match: mesh has "
                f"{sorted(mesh_tags)}, boundary conditions have {sorted(bc_tags)}"
            )
        bindex = mesh.boundary_index
        self.ghosts = np.arange(mesh.n_inner, mesh.n_cells)
        self.source = np.array(mesh.ghost_owner, dtype=int)
        self.prescribed: List[tuple] = []
        for bc in model.boundary_conditions:
            faces = mesh.tag_faces[bc.tag]
            ghosts = np.array([mesh.n_inner + bindex[int(f)] for f in faces], dtype=int)
            if bc.kind == "periodic":
                self.source[ghosts - mesh.n_inner] = _periodic_sources(mesh, bc.tag, bc.partner)
            elif bc.kind == "prescribe":
                owners = mesh.face_cells[faces, 0]
                dist = np.linalg.norm(mesh.centroids[ghosts] - mesh.centroids[owners], axis=1)
                X = coords_array(mesh.face_centers[faces], dist)
                normals = np.zeros((2, len(faces)))
                normals[: mesh.dimension] = mesh.face_normals[faces].T
                fields = [i for i, _ in bc.values]
                self.prescribed.append((bc.tag, ghosts, owners, X, normals, fields))

    def __call__(self, t, Q, Qaux, params) -> np.ndarray:
        """Return a copy of ``Q`` with ghost columns written."""
        params = as_params(self.model, params)
        out = np.array(Q, dtype=float, copy=True)
        out[:, self.ghosts] = out[:, self.source]
        for tag, ghosts, owners, X, normals, fields in self.prescribed:
            kern = self.model.kernels.boundary(tag)
            vals = kern(t, X, Q[:, owners], Qaux[:, owners], params, normals)
            out[np.ix_(fields, ghosts)] = vals
        return out


def make_boundary_operator(model: ModelDef, mesh: Mesh) -> BoundaryOperator:
    return BoundaryOperator(model, mesh)


def fill_ghosts(model: ModelDef, mesh: Mesh, t, Q, Qaux, params=None) -> np.ndarray:
    return BoundaryOperator(model, mesh)(t, Q, Qaux, params)
