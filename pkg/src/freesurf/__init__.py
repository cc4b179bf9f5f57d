"""Depth-averaged free-surface flow models on unstructured meshes.

Subpackages: ``expr`` (symbolic expressions and kernels), ``basis``
(vertical Legendre moments), ``mesh``, ``model``, ``solver`` and ``io``.
"""
from . import basis, expr, io, mesh, model, solver
from .mesh import parse_msh, uniform_interval
from .model import poisson_model, sme_model, swe_model, vam_models
from .solver import (
    SolverSettings,
    steady_residual_solve,
    transient_hyperbolic_solve,
    vam_solve,
)

__version__ = "0.1.0"

__all__ = [
    "basis", "expr", "io", "mesh", "model", "solver",
    "parse_msh", "uniform_interval",
    "poisson_model", "sme_model", "swe_model", "vam_models",
    "SolverSettings", "steady_residual_solve", "transient_hyperbolic_solve", "vam_solve",
]
