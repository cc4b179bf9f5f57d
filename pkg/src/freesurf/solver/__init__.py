"""Finite-volume step, Newton-Krylov machinery and the composed solvers."""
from .aux import AuxUpdater, update_aux
from .drivers import (
    RunResult,
    Snapshot,
    SolveError,
    initial_state,
    residual_operator,
    snapshot,
    steady_residual_solve,
    transient_hyperbolic_solve,
    vam_solve,
)
from .fv import StepError, cell_lengths, cell_speeds, compute_dt, face_fluctuations, hyperbolic_step
from .krylov import GmresError, NewtonError, NewtonResult, fd_jvp, gmres, newton_solve
from .settings import GmresSettings, NewtonSettings, SolverSettings
from .source import step_source, step_source_implicit

__all__ = [
    "AuxUpdater", "GmresError", "GmresSettings", "NewtonError", "NewtonResult", "NewtonSettings",
    "RunResult", "Snapshot", "SolveError", "SolverSettings", "StepError", "cell_lengths",
    "cell_speeds", "compute_dt", "face_fluctuations", "fd_jvp", "gmres", "hyperbolic_step",
    "initial_state", "newton_solve", "residual_operator", "snapshot", "steady_residual_solve",
    "step_source", "step_source_implicit", "transient_hyperbolic_solve", "update_aux", "vam_solve",
]
