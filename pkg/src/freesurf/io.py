"""Result files: legacy VTK, 1D CSV, lifted 3D VTK and restart checkpoints."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .mesh import VTK_QUAD, VTK_TRIANGLE, Mesh
from .model import ModelDef, UnsupportedOperationError, lift_samples
from .solver import Snapshot

CHECKPOINT_VERSION = 1
VTK_WEDGE = 13
VTK_HEXAHEDRON = 12


def fmt(v) -> str:
    """Shortest text that carries every bit of a double."""
    return format(float(v), ".17g")


def _write(path, text: str):
    path = Path(path)
    try:
        with open(path, "w", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _vtk_head(title: str, points: np.ndarray, cells: Sequence[Sequence[int]], types: Sequence[int]):
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {len(points)} double"]
    lines += [" ".join(fmt(c) for c in p) for p in points]
    size = sum(len(c) + 1 for c in cells)
    lines.append(f"CELLS {len(cells)} {size}")
    lines += [" ".join(str(k) for k in (len(c), *c)) for c in cells]
    lines.append(f"CELL_TYPES {len(cells)}")
    lines += [str(t) for t in types]
    return lines


def _scalars(name, values):
    return [f"SCALARS {name} double 1", "LOOKUP_TABLE default"] + [fmt(v) for v in values]


def write_vtk(mesh: Mesh, snap: Snapshot, path):
    """Legacy ASCII unstructured grid of the inner cells with one scalar per field."""
    if mesh.dimension != 2:
        raise ValueError("write_vtk expects a 2D mesh; use write_csv_1d for 1D results")
    n = mesh.n_inner
    cells = mesh.cell_nodes[:n]
    types = [VTK_TRIANGLE if len(c) == 3 else VTK_QUAD for c in cells]
    lines = _vtk_head(f"freesurf t={fmt(snap.time)} step={snap.step}", mesh.nodes, cells, types)
    names = list(snap.field_names) + list(snap.aux_names)
    data = list(np.asarray(snap.Q)) + list(np.asarray(snap.Qaux))
    if names:
        lines.append(f"CELL_DATA {n}")
        for name, col in zip(names, data):
            lines += _scalars(name, col[:n])
    return _write(path, "\n".join(lines) + "\n")


def write_csv_1d(mesh: Mesh, snap: Snapshot, path):
    """One row per inner cell, sorted by centroid, 17 significant digits."""
    if mesh.dimension != 1:
        raise ValueError("write_csv_1d expects a 1D mesh")
    n = mesh.n_inner
    x = mesh.centroids[:n, 0]
    order = np.argsort(x, kind="stable")
    names = list(snap.field_names) + list(snap.aux_names)
    cols = np.vstack([x] + [np.asarray(c)[:n] for c in list(snap.Q) + list(snap.Qaux)])
    lines = [",".join(["x"] + names)]
    lines += [",".join(fmt(v) for v in cols[:, i]) for i in order]
    return _write(path, "\n".join(lines) + "\n")


def read_csv_1d(path):
    """(names, columns) back from write_csv_1d."""
    with open(path) as f:
        names = f.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in f if line.strip()]
    return names, np.array(rows).T.reshape(len(names), -1)


def write_lifted_vtk(mesh: Mesh, model: ModelDef, snap: Snapshot, nz: int, path, params=None):
    """Extrude each cell over nz levels with point data rho, p and velocity (u, v, w).

    Points are duplicated per column so each column keeps its own profile.
    """
    if model.lift is None:
        raise UnsupportedOperationError(f"model {model.name!r} has no lifting map")
    z, vals = lift_samples(model, mesh, snap.Q, snap.Qaux, nz, params)
    points, cells, types = [], [], []
    pdata = []
    for i in range(mesh.n_inner):
        nodes = mesh.nodes[list(mesh.cell_nodes[i])]
        m = len(nodes)
        base = len(points)
        for k in range(nz):
            for p in nodes:
                if mesh.dimension == 1:
                    points.append((p[0], 0.0, z[k]))
                else:
                    points.append((p[0], p[1], z[k]))
                pdata.append(vals[:, i, k])
        for k in range(nz - 1):
            lo, hi = base + k * m, base + (k + 1) * m
            if mesh.dimension == 1:
                cells.append((lo, lo + 1, hi + 1, hi))
                types.append(VTK_QUAD)
            else:
                cells.append(tuple(range(lo, lo + m)) + tuple(range(hi, hi + m)))
                types.append(VTK_WEDGE if m == 3 else VTK_HEXAHEDRON)
    pdata = np.array(pdata)
    lines = _vtk_head(f"freesurf lifted t={fmt(snap.time)}", np.array(points), cells, types)
    lines.append(f"POINT_DATA {len(points)}")
    lines += _scalars("rho", pdata[:, 0])
    lines += _scalars("p", pdata[:, 4])
    lines.append("VECTORS velocity double")
    lines += [" ".join(fmt(c) for c in row[1:4]) for row in pdata]
    return _write(path, "\n".join(lines) + "\n")


def read_vtk_counts(path):
    """Minimal reader: POINTS, CELLS and CELL_DATA counts plus the scalar blocks."""
    out = {"points": None, "cells": None, "cell_data": None, "scalars": {}}
    with open(path) as f:
        tokens = f.read().split("\n")
    i = 0
    current = None
    while i < len(tokens):
        parts = tokens[i].split()
        key = parts[0] if parts else ""
        if key == "POINTS":
            out["points"] = int(parts[1])
        elif key == "CELLS":
            out["cells"] = int(parts[1])
        elif key == "CELL_DATA":
            out["cell_data"] = int(parts[1])
        elif key == "SCALARS":
            current = parts[1]
            count = out["cell_data"] if out["cell_data"] is not None else out["points"]
            out["scalars"][current] = np.array([float(v) for v in tokens[i + 2 : i + 2 + count]])
            i += 1 + count
        i += 1
    return out


# checkpoints ----------------------------------------------------------------

class CheckpointError(ValueError):
    pass


@dataclass
class SolverState:
    """Everything needed to restart: full arrays including ghost columns."""

    model_name: str
    field_names: tuple
    aux_names: tuple
    n_inner: int
    Q: np.ndarray
    Qaux: np.ndarray

    @property
    def n_ghost(self) -> int:
        return self.Q.shape[1] - self.n_inner

    @classmethod
    def of(cls, model: ModelDef, mesh: Mesh, Q, Qaux) -> "SolverState":
        return cls(model.name, model.field_names, model.aux_names, mesh.n_inner,
                   np.asarray(Q, dtype=float), np.asarray(Qaux, dtype=float))


def _blob_path(path) -> Path:
    return Path(str(path) + ".bin")


def checkpoint_write(state: SolverState, t: float, step: int, path):
    """Writes ``path`` (metadata text) and ``path.bin`` (LE float64, Q then Qaux)."""
    Q = np.ascontiguousarray(state.Q, dtype="<f8")
    A = np.ascontiguousarray(state.Qaux, dtype="<f8").reshape(len(state.aux_names), Q.shape[1])
    meta = [
        f"version {CHECKPOINT_VERSION}",
        f"model {state.model_name}",
        f"n_fields {Q.shape[0]}",
        f"n_aux {A.shape[0]}",
        f"n_inner {state.n_inner}",
        f"n_ghost {Q.shape[1] - state.n_inner}",
        f"time {float(t)!r}",
        f"step {int(step)}",
        "fields " + " ".join(state.field_names),
        "aux " + " ".join(state.aux_names),
        "endian LE",
    ]
    _write(path, "\n".join(meta) + "\n")
    blob = _blob_path(path)
    tmp = blob.with_suffix(".bin.tmp")
    with open(tmp, "wb") as f:
        f.write(Q.tobytes(order="C"))
        f.write(A.tobytes(order="C"))
    os.replace(tmp, blob)
    return Path(path)


def checkpoint_read(path):
    """(state, t, step) from a checkpoint pair; arrays come back bit-exact."""
    meta = {}
    with open(path) as f:
        for line in f:
            key, _, value = line.rstrip("\n").partition(" ")
            meta[key] = value
    try:
        version = int(meta["version"])
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"{path}: missing or bad version line") from exc
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: checkpoint version {version}, expected {CHECKPOINT_VERSION}")
    if meta.get("endian") != "LE":
        raise CheckpointError(f"{path}: unknown endianness tag {meta.get('endian')!r}")
    nf, na = int(meta["n_fields"]), int(meta["n_aux"])
    ni, ng = int(meta["n_inner"]), int(meta["n_ghost"])
    nc = ni + ng
    raw = _blob_path(path).read_bytes()
    expected = 8 * (nf + na) * nc
    if len(raw) != expected:
        raise CheckpointError(f"{path}: blob has {len(raw)} bytes, metadata implies {expected}")
    data = np.frombuffer(raw, dtype="<f8").astype(float)
    Q = data[: nf * nc].reshape(nf, nc).copy()
    A = data[nf * nc :].reshape(na, nc).copy()
    fields = tuple(meta.get("fields", "").split())
    aux = tuple(meta.get("aux", "").split())
    if len(fields) != nf or len(aux) != na:
        raise CheckpointError(f"{path}: name lists do not match n_fields/n_aux")
    state = SolverState(meta["model"], fields, aux, ni, Q, A)
    return state, float(meta["time"]), int(meta["step"])
