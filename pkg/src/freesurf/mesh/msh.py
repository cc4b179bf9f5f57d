"""Reader for GMSH MSH 2.2 ASCII files."""
from __future__ import annotations

import shlex
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .core import Mesh, MeshError, build_mesh_1d, build_mesh_2d

# element type -> node count for the types we accept
_LINE, _TRI, _QUAD, _POINT = 1, 2, 3, 15
_NODES_PER = {_LINE: 2, _TRI: 3, _QUAD: 4, _POINT: 1}


def _sections(lines: List[str]) -> Dict[str, List[str]]:
    out: Dict[str, List[str]] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("$") and not line.startswith("$End"):
            name = line[1:]
            body = []
            i += 1
            while i < len(lines) and lines[i].strip() != f"$End{name}":
                body.append(lines[i])
                i += 1
            if i == len(lines):
                raise MeshError(f"section ${name} is not terminated")
            out[name] = body
        i += 1
    return out


def parse_msh_text(text: str) -> Mesh:
    sec = _sections(text.splitlines())
    for need in ("MeshFormat", "Nodes", "Elements"):
        if need not in sec:
            raise MeshError(f"missing ${need} section")
    fmt = sec["MeshFormat"][0].split()
    if fmt[0] != "2.2":
        raise MeshError(f"unsupported MSH version {fmt[0]} (only 2.2 ASCII is read)")
    if len(fmt) > 1 and fmt[1] != "0":
        raise MeshError("binary MSH files are not supported")

    names: Dict[Tuple[int, int], str] = {}
    for line in sec.get("PhysicalNames", [])[1:]:
        parts = shlex.split(line)
        if len(parts) >= 3:
            names[(int(parts[0]), int(parts[1]))] = parts[2]

    node_lines = sec["Nodes"]
    n_nodes = int(node_lines[0])
    ids = {}
    coords = np.zeros((n_nodes, 3))
    for k, line in enumerate(node_lines[1 : 1 + n_nodes]):
        parts = line.split()
        ids[int(parts[0])] = k
        coords[k] = [float(v) for v in parts[1:4]]

    elements: List[Tuple[int, int, Tuple[int, ...]]] = []
    elem_lines = sec["Elements"]
    for line in elem_lines[1 : 1 + int(elem_lines[0])]:
        parts = [int(v) for v in line.split()]
        etype, ntags = parts[1], parts[2]
        phys = parts[3] if ntags > 0 else 0
        if etype not in _NODES_PER:
            raise MeshError(f"element {parts[0]} has unsupported type {etype}")
        nodes = tuple(ids[v] for v in parts[3 + ntags :])
        if len(nodes) != _NODES_PER[etype]:
            raise MeshError(f"element {parts[0]} has {len(nodes)} nodes, expected {_NODES_PER[etype]}")
        elements.append((etype, phys, nodes))

    if any(e[0] in (_TRI, _QUAD) for e in elements):
        cells = [e[2] for e in elements if e[0] in (_TRI, _QUAD)]
        tags = {}
        for etype, phys, nodes in elements:
            if etype == _LINE and (1, phys) in names:
                tags[frozenset(nodes)] = names[(1, phys)]
        used = sorted({v for c in cells for v in c})
        return build_mesh_2d(*_compact(coords, cells, tags, used))
    cells = [e[2] for e in elements if e[0] == _LINE]
    if not cells:
        raise MeshError("no cell elements found")
    points = {}
    for etype, phys, nodes in elements:
        if etype == _POINT and (0, phys) in names:
            points[nodes[0]] = names[(0, phys)]
    return build_mesh_1d(coords[:, 0], cells, points)


def _compact(coords, cells, tags, used):
    """Drop nodes not referenced by any cell so VTK output carries no orphans."""
    remap = {old: new for new, old in enumerate(used)}
    cells = [tuple(remap[v] for v in c) for c in cells]
    tags = {frozenset(remap[v] for v in k): t for k, t in tags.items() if all(v in remap for v in k)}
    return coords[used], cells, tags


def parse_msh(path) -> Mesh:
    return parse_msh_text(Path(path).read_text())
