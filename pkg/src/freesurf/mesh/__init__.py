"""Unstructured meshes, MSH ingestion and least-squares derivative reconstruction."""
from .core import VTK_LINE, VTK_QUAD, VTK_TRIANGLE, Mesh, MeshError, build_mesh_1d, build_mesh_2d, uniform_interval
from .lsq import LsqStencils, build_lsq_stencils, compute_derivatives, monomials
from .msh import parse_msh, parse_msh_text

__all__ = [
    "Mesh", "MeshError", "LsqStencils", "VTK_LINE", "VTK_QUAD", "VTK_TRIANGLE",
    "build_mesh_1d", "build_mesh_2d", "build_lsq_stencils", "compute_derivatives",
    "monomials", "parse_msh", "parse_msh_text", "uniform_interval",
]
