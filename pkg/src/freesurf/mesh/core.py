"""Unstructured 1D/2D finite-volume mesh with a single ghost layer."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np


class MeshError(ValueError):
    pass


VTK_LINE, VTK_TRIANGLE, VTK_QUAD = 3, 5, 9


@dataclass(eq=False)
class Mesh:
    """Cells ``[0, n_inner)`` are inner cells, ``[n_inner, n_inner + n_ghost)`` ghosts.

    Ghost ``n_inner + k`` belongs to boundary face ``boundary_faces[k]``.
    Face normals point from ``face_cells[:, 0]`` (left) to ``face_cells[:, 1]``
    (right); on boundary faces the left cell is the inner owner and the normal
    points outward.
    """

    dimension: int
    n_inner: int
    n_ghost: int
    centroids: np.ndarray
    volumes: np.ndarray
    face_areas: np.ndarray
    face_normals: np.ndarray
    face_centers: np.ndarray
    face_cells: np.ndarray
    boundary_faces: np.ndarray
    boundary_tags: Tuple[str, ...]
    cell_face_offsets: np.ndarray
    cell_face_ids: np.ndarray
    nodes: np.ndarray
    cell_nodes: Tuple[Tuple[int, ...], ...]
    cell_types: Tuple[int, ...]
    tag_faces: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not self.tag_faces:
            tags: Dict[str, List[int]] = {}
            for k, tag in enumerate(self.boundary_tags):
                tags.setdefault(tag, []).append(int(self.boundary_faces[k]))
            self.tag_faces = {t: np.array(v, dtype=int) for t, v in tags.items()}
        for arr in (self.centroids, self.volumes, self.face_areas, self.face_normals,
                    self.face_centers, self.face_cells, self.boundary_faces):
            arr.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return self.n_inner + self.n_ghost

    @property
    def n_faces(self) -> int:
        return len(self.face_areas)

    @property
    def tags(self) -> Tuple[str, ...]:
        return tuple(sorted(self.tag_faces))

    @property
    def ghost_owner(self) -> np.ndarray:
        return self.face_cells[self.boundary_faces, 0]

    @property
    def boundary_index(self) -> Dict[int, int]:
        """Face id -> position in ``boundary_faces``."""
        return {int(f): k for k, f in enumerate(self.boundary_faces)}

    def cell_faces(self, i: int) -> np.ndarray:
        return self.cell_face_ids[self.cell_face_offsets[i] : self.cell_face_offsets[i + 1]]

    def interior_neighbors(self) -> List[List[int]]:
        """Inner-cell adjacency across interior faces."""
        nb: List[List[int]] = [[] for _ in range(self.n_inner)]
        for left, right in self.face_cells:
            if right < self.n_inner:
                nb[left].append(int(right))
                nb[right].append(int(left))
        return nb

    def closure_defect(self) -> np.ndarray:
        """Per inner cell: |sum of outward normal * area| / sum of areas."""
        acc = np.zeros((self.n_inner, self.dimension))
        tot = np.zeros(self.n_inner)
        for f, (left, right) in enumerate(self.face_cells):
            v = self.face_normals[f] * self.face_areas[f]
            acc[left] += v
            tot[left] += self.face_areas[f]
            if right < self.n_inner:
                acc[right] -= v
                tot[right] += self.face_areas[f]
        return np.linalg.norm(acc, axis=1) / tot


def _mirror(c: np.ndarray, p: np.ndarray, n: np.ndarray) -> np.ndarray:
    return c + 2.0 * np.dot(p - c, n) * n


def _finish(dimension, centroids, volumes, faces, boundary_tag_of, nodes, cell_nodes, cell_types) -> Mesh:
    """Assemble arrays; ``faces`` is a list of (area, normal, center, left, right_or_None, key)."""
    n_inner = len(centroids)
    interior = [f for f in faces if f[4] is not None]
    boundary = [f for f in faces if f[4] is None]
    ordered = interior + boundary
    n_ghost = len(boundary)
    cents = np.zeros((n_inner + n_ghost, dimension))
    cents[:n_inner] = centroids
    vols = np.zeros(n_inner + n_ghost)
    vols[:n_inner] = volumes
    areas = np.array([f[0] for f in ordered], dtype=float)
    normals = np.array([f[1] for f in ordered], dtype=float).reshape(len(ordered), dimension)
    centers = np.array([f[2] for f in ordered], dtype=float).reshape(len(ordered), dimension)
    fcells = np.zeros((len(ordered), 2), dtype=int)
    tags = []
    bfaces = []
    for fid, (area, n, c, left, right, key) in enumerate(ordered):
        fcells[fid, 0] = left
        if right is None:
            k = len(bfaces)
            g = n_inner + k
            fcells[fid, 1] = g
            bfaces.append(fid)
            cents[g] = _mirror(cents[left], np.asarray(c, float), np.asarray(n, float))
            vols[g] = vols[left]
            tags.append(boundary_tag_of(key))
        else:
            fcells[fid, 1] = right
    per_cell: List[List[int]] = [[] for _ in range(n_inner)]
    for fid, (left, right) in enumerate(fcells):
        per_cell[left].append(fid)
        if right < n_inner:
            per_cell[right].append(fid)
    offsets = np.zeros(n_inner + 1, dtype=int)
    offsets[1:] = np.cumsum([len(p) for p in per_cell])
    ids = np.array([f for p in per_cell for f in p], dtype=int)
    return Mesh(
        dimension=dimension,
        n_inner=n_inner,
        n_ghost=n_ghost,
        centroids=cents,
        volumes=vols,
        face_areas=areas,
        face_normals=normals,
        face_centers=centers,
        face_cells=fcells,
        boundary_faces=np.array(bfaces, dtype=int),
        boundary_tags=tuple(tags),
        cell_face_offsets=offsets,
        cell_face_ids=ids,
        nodes=np.asarray(nodes, dtype=float),
        cell_nodes=tuple(tuple(int(v) for v in c) for c in cell_nodes),
        cell_types=tuple(cell_types),
    )


def build_mesh_1d(node_x: Sequence[float], cells: Sequence[Tuple[int, int]],
                  point_tags: Mapping[int, str]) -> Mesh:
    """1D mesh from node positions, 2-node cells and tagged boundary nodes."""
    x = np.asarray(node_x, dtype=float)
    centroids = []
    volumes = []
    incident: Dict[int, List[int]] = {}
    for ci, (a, b) in enumerate(cells):
        centroids.append([(x[a] + x[b]) / 2.0])
        length = abs(x[b] - x[a])
        if length <= 0.0:
            raise MeshError(f"cell {ci} has zero length")
        volumes.append(length)
        incident.setdefault(a, []).append(ci)
        incident.setdefault(b, []).append(ci)
    faces = []
    for node in sorted(incident):
        cs = incident[node]
        if len(cs) > 2:
            raise MeshError(f"non-manifold node {node} shared by {len(cs)} cells")
        if len(cs) == 2:
            c0, c1 = cs
            if centroids[c0][0] > centroids[c1][0]:
                c0, c1 = c1, c0
            faces.append((1.0, [1.0], [x[node]], c0, c1, node))
        else:
            c0 = cs[0]
            sign = 1.0 if x[node] > centroids[c0][0] else -1.0
            faces.append((1.0, [sign], [x[node]], c0, None, node))

    def tag_of(node):
        if node not in point_tags:
            raise MeshError(f"boundary node {node} has no physical name")
        return point_tags[node]

    nodes3 = np.zeros((len(x), 3))
    nodes3[:, 0] = x
    return _finish(1, centroids, volumes, faces, tag_of, nodes3, cells, [VTK_LINE] * len(cells))


def _polygon_area_centroid(pts: np.ndarray):
    x, y = pts[:, 0], pts[:, 1]
    xs, ys = np.roll(x, -1), np.roll(y, -1)
    cross = x * ys - xs * y
    a = cross.sum() / 2.0
    cx = ((x + xs) * cross).sum() / (6.0 * a)
    cy = ((y + ys) * cross).sum() / (6.0 * a)
    return abs(a), np.array([cx, cy])


def build_mesh_2d(nodes: np.ndarray, cells: Sequence[Tuple[int, ...]],
                  edge_tags: Mapping[frozenset, str]) -> Mesh:
    """2D mesh from node coordinates, triangle/quad cells and tagged boundary edges."""
    nodes = np.asarray(nodes, dtype=float)
    xy = nodes[:, :2]
    centroids = []
    volumes = []
    types = []
    edges: Dict[frozenset, List[Tuple[int, Tuple[int, int]]]] = {}
    order: List[frozenset] = []
    for ci, cell in enumerate(cells):
        if len(cell) == 3:
            types.append(VTK_TRIANGLE)
        elif len(cell) == 4:
            types.append(VTK_QUAD)
        else:
            raise MeshError(f"cell {ci} has {len(cell)} nodes; only triangles and quads are supported")
        area, c = _polygon_area_centroid(xy[list(cell)])
        if area <= 0.0:
            raise MeshError(f"cell {ci} is degenerate")
        centroids.append(c)
        volumes.append(area)
        for k in range(len(cell)):
            a, b = cell[k], cell[(k + 1) % len(cell)]
            key = frozenset((a, b))
            if key not in edges:
                edges[key] = []
                order.append(key)
            edges[key].append((ci, (a, b)))
    faces = []
    for key in order:
        owners = edges[key]
        if len(owners) > 2:
            raise MeshError(f"non-manifold face {sorted(key)} shared by {len(owners)} cells")
        a, b = owners[0][1]
        d = xy[b] - xy[a]
        length = float(np.hypot(*d))
        n = np.array([d[1], -d[0]]) / length
        center = (xy[a] + xy[b]) / 2.0
        left = owners[0][0]
        if np.dot(n, center - centroids[left]) < 0:
            n = -n
        right = owners[1][0] if len(owners) == 2 else None
        faces.append((length, n, center, left, right, key))

    def tag_of(key):
        if key not in edge_tags:
            raise MeshError(f"boundary face {sorted(key)} has no physical name")
        return edge_tags[key]

    return _finish(2, centroids, volumes, faces, tag_of, nodes, cells, types)


def uniform_interval(a: float, b: float, n: int, left_tag: str = "left", right_tag: str = "right") -> Mesh:
    """``n`` equal cells on ``[a, b]`` with tagged end points."""
    if not a < b:
        raise MeshError("interval needs a < b")
    if n < 1:
        raise MeshError("interval needs at least one cell")
    x = a + (b - a) * np.arange(n + 1) / n
    cells = [(i, i + 1) for i in range(n)]
    return build_mesh_1d(x, cells, {0: left_tag, n: right_tag})
