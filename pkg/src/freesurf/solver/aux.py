"""Model-declared aux field updates (algebraic closures and reconstructed derivatives)."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..expr import free_vars
from ..mesh import Mesh, build_lsq_stencils, compute_derivatives
from ..model import ModelDef, as_params, coords_array


def stencil_boundary_points(model: ModelDef):
    """Where each tag's ghost value sits when ghosts enter stencils."""
    if not model.boundary_data_in_stencils:
        return None
    return {bc.tag: ("ghost" if bc.kind == "periodic" else "face") for bc in model.boundary_conditions}


def state_dependent(model: ModelDef):
    """Per update: does it (transitively through earlier updates) read the state?"""
    dirty = set()
    out = []
    for u in model.aux_updates:
        vs = free_vars(u.expr)
        dep = any(v.kind == "state" for v in vs) or any(
            v.kind == "aux" and model.aux_names[v.index] in dirty for v in vs
        )
        if dep:
            dirty.add(u.target)
        out.append(dep)
    return out


class AuxUpdater:
    """Apply a model's aux updates in order.

    ``which`` selects ``"all"``, only the ``"state"``-dependent updates, or only
    the ``"static"`` ones (which a fixed-aux inner solve needs just once).
    """

    def __init__(self, model: ModelDef, mesh: Mesh):
        self.model = model
        self.mesh = mesh
        self.X = coords_array(mesh.centroids)
        self.index = [model.aux_names.index(u.target) for u in model.aux_updates]
        self.dependent = state_dependent(model)
        self.stencils = None
        if any(u.derivative is not None for u in model.aux_updates):
            self.stencils = build_lsq_stencils(mesh, model.reconstruction_degree,
                                               stencil_boundary_points(model))

    def __call__(self, t, Q, Qaux, params, which: str = "all") -> np.ndarray:
        params = as_params(self.model, params)
        out = np.array(Qaux, dtype=float, copy=True)
        for k, u in enumerate(self.model.aux_updates):
            if which == "state" and not self.dependent[k]:
                continue
            if which == "static" and self.dependent[k]:
                continue
            val = self.model.kernels.aux_update(k)(t, self.X, Q, out, params)[0]
            if u.derivative is not None:
                val = compute_derivatives(self.mesh, self.stencils, val, [u.derivative])[:, 0]
            out[self.index[k]] = val
        return out


def update_aux(model: ModelDef, mesh: Mesh, t, Q, Qaux, params=None, which: Optional[str] = "all") -> np.ndarray:
    return AuxUpdater(model, mesh)(t, Q, Qaux, params, which)
