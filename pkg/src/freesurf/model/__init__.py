"""PDE model definitions and the shipped SWE, SME, VAM and Poisson builders."""
from .boundary import BoundaryConfigError, BoundaryOperator, fill_ghosts, make_boundary_operator
from .core import (
    AuxUpdate,
    BoundaryCondition,
    ModelDef,
    ModelError,
    UnsupportedOperationError,
    as_params,
    coords_array,
    extrapolation,
    periodic,
    periodic_pair,
    prescribe,
)
from .eigen import (
    EigenvalueError,
    HyperbolicityError,
    eigenvalue_stack,
    max_wave_speed,
    quasilinear_eigenvalues,
    quasilinear_matrices,
)
from .lifting import LiftedColumn, lift_samples, lift_to_3d
from .poisson import poisson_model
from .sme import MAX_LEVEL, sme_model
from .swe import swe_model
from .vam import vam_models

__all__ = [
    "AuxUpdate", "BoundaryCondition", "BoundaryConfigError", "BoundaryOperator", "EigenvalueError",
    "HyperbolicityError", "LiftedColumn", "MAX_LEVEL", "ModelDef", "ModelError",
    "UnsupportedOperationError", "as_params", "coords_array", "eigenvalue_stack", "extrapolation",
    "fill_ghosts", "lift_samples", "lift_to_3d", "make_boundary_operator", "max_wave_speed",
    "periodic", "periodic_pair", "poisson_model", "prescribe", "quasilinear_eigenvalues",
    "quasilinear_matrices", "sme_model", "swe_model", "vam_models",
]
