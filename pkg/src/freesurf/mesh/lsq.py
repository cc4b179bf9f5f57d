"""Weighted least-squares derivative reconstruction on cell stencils."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import Mesh, MeshError


def monomials(dimension: int, degree: int) -> Tuple[Tuple[int, ...], ...]:
    """Multi-indices with 1 <= |alpha| <= degree, graded then lexicographic (x first)."""
    out = []
    for total in range(1, degree + 1):
        for alpha in itertools.product(range(total + 1), repeat=dimension):
            if sum(alpha) == total:
                out.append(alpha)
    return tuple(sorted(out, key=lambda a: (sum(a), tuple(-v for v in a))))


@dataclass(frozen=True)
class LsqStencils:
    """Per inner cell: neighbour ids and weights mapping value differences to derivatives.

    ``weights[i, m, j]`` multiplies ``f[neighbors[i, j]] - f[i]`` and sums to the
    derivative ``D^alpha f`` for ``alpha = exponents[m]``. Padded slots carry
    neighbour 0 and weight 0.
    """

    degree: int
    dimension: int
    exponents: Tuple[Tuple[int, ...], ...]
    neighbors: np.ndarray
    weights: np.ndarray
    counts: np.ndarray

    def stencil(self, i: int) -> np.ndarray:
        return self.neighbors[i, : self.counts[i]]


def _sample_points(mesh: Mesh, boundary_points: Optional[Mapping[str, str]]):
    """Ghost data points usable in stencils: owner cell -> [(ghost id, position)]."""
    extra: Dict[int, list] = {}
    if not boundary_points:
        return extra
    for k, f in enumerate(mesh.boundary_faces):
        tag = mesh.boundary_tags[k]
        where = boundary_points.get(tag)
        if where is None:
            continue
        g = mesh.n_inner + k
        pos = mesh.face_centers[f] if where == "face" else mesh.centroids[g]
        extra.setdefault(int(mesh.face_cells[f, 0]), []).append((g, np.asarray(pos, float)))
    return extra


def build_lsq_stencils(mesh: Mesh, degree: int,
                       boundary_points: Optional[Mapping[str, str]] = None) -> LsqStencils:
    """Grow face-neighbour rings until the fit is over-determined, then solve the weighted fit.

    By default only inner cells enter a stencil. ``boundary_points`` maps a
    physical tag to ``"face"`` or ``"ghost"`` to also use that tag's ghost values,
    located at the boundary face midpoint or the ghost centroid.
    """
    if degree < 1:
        raise ValueError("reconstruction degree must be at least 1")
    d = mesh.dimension
    exps = monomials(d, degree)
    need = len(exps) + 1
    adj = mesh.interior_neighbors()
    extra = _sample_points(mesh, boundary_points)
    factorial = np.array([math.prod(math.factorial(a) for a in alpha) for alpha in exps], dtype=float)
    expo = np.array(exps, dtype=float)

    stencils = []
    for i in range(mesh.n_inner):
        members = [i]
        seen = {i}
        ring = [i]
        points = []  # (id, position)
        while True:
            nxt = []
            for c in ring:
                for nb in adj[c]:
                    if nb not in seen:
                        seen.add(nb)
                        nxt.append(nb)
            for c in ring:
                for g, pos in extra.get(c, ()):
                    if g not in seen:
                        seen.add(g)
                        points.append((g, pos))
            for nb in nxt:
                points.append((nb, mesh.centroids[nb]))
            members.extend(nxt)
            ring = nxt
            if len(points) >= need:
                break
            if not ring:
                raise MeshError(
                    f"mesh too small for degree {degree} reconstruction: cell {i} reaches "
                    f"{len(points)} of {need} required stencil points"
                )
        ids = np.array([p[0] for p in points], dtype=int)
        dx = np.array([p[1] for p in points], dtype=float) - mesh.centroids[i]
        V = np.prod(dx[:, None, :] ** expo[None, :, :], axis=2) / factorial
        w = 1.0 / np.linalg.norm(dx, axis=1)
        G = np.linalg.pinv(V * w[:, None]) * w[None, :]
        stencils.append((ids, G))

    width = max(len(s[0]) for s in stencils) if stencils else 0
    nb = np.zeros((mesh.n_inner, width), dtype=int)
    W = np.zeros((mesh.n_inner, len(exps), width))
    counts = np.zeros(mesh.n_inner, dtype=int)
    for i, (ids, G) in enumerate(stencils):
        nb[i, : len(ids)] = ids
        W[i, :, : len(ids)] = G
        counts[i] = len(ids)
    return LsqStencils(degree, d, exps, nb, W, counts)


def compute_derivatives(mesh: Mesh, stencils: LsqStencils, field: np.ndarray,
                        multi_indices: Sequence[Sequence[int]]) -> np.ndarray:
    """Derivative estimates, shape ``(n_cells_total, len(multi_indices))``.

    Inner rows come from the stencil fit; ghost rows copy their owner cell.
    """
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_cells,):
        raise ValueError(f"field must have length {mesh.n_cells}, got shape {field.shape}")
    rows = []
    for alpha in multi_indices:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != stencils.dimension:
            raise ValueError(f"multi-index {alpha} does not match dimension {stencils.dimension}")
        if sum(alpha) > stencils.degree:
            raise ValueError(f"derivative order {sum(alpha)} exceeds stencil degree {stencils.degree}")
        rows.append(None if sum(alpha) == 0 else stencils.exponents.index(alpha))
    n = mesh.n_inner
    diff = field[stencils.neighbors] - field[:n, None]
    out = np.empty((mesh.n_cells, len(rows)))
    for k, m in enumerate(rows):
        if m is None:
            out[:n, k] = field[:n]
        else:
            out[:n, k] = np.einsum("cj,cj->c", stencils.weights[:, m, :], diff)
    out[n:] = out[mesh.ghost_owner]
    return out
