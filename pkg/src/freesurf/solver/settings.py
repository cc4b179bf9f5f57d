from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class NewtonSettings:
    tol_abs: float = 1e-10
    tol_rel: float = 1e-14
    max_iter: int = 20
    # None -> sqrt(eps) (1 + |Q|_inf) / |v|_inf
    fd_epsilon: Optional[float] = None

    def __post_init__(self):
        if self.tol_abs <= 0 or self.tol_rel <= 0:
            raise ValueError("Newton tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("Newton needs at least one iteration")


@dataclass
class GmresSettings:
    tol: float = 1e-10
    restart: int = 200
    max_iter: int = 4000

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("GMRES tolerance must be positive")
        if self.restart < 1 or self.max_iter < 1:
            raise ValueError("GMRES restart and max_iter must be positive")


@dataclass
class SolverSettings:
    cfl: float = 0.45
    t_end: float = 1.0
    output_interval: Optional[float] = None
    newton: NewtonSettings = field(default_factory=NewtonSettings)
    gmres: GmresSettings = field(default_factory=GmresSettings)
    fixed_dt: Optional[float] = None
    max_steps: Optional[int] = None
    implicit_source: bool = False

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.output_interval is not None and self.output_interval <= 0:
            raise ValueError("output interval must be positive")
        if self.fixed_dt is not None and self.fixed_dt <= 0:
            raise ValueError("fixed dt must be positive")
