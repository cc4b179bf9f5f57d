"""Composed solvers: transient hyperbolic, steady residual and the VAM predictor-corrector."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..mesh import Mesh
from ..model import BoundaryOperator, ModelDef, as_params, coords_array
from .aux import AuxUpdater
from .fv import compute_dt, hyperbolic_step
from .krylov import NewtonResult, newton_solve
from .settings import SolverSettings
from .source import step_source, step_source_implicit


class SolveError(RuntimeError):
    def __init__(self, message, t=None, step=None):
        self.t = t
        self.step = step
        super().__init__(message)


@dataclass
class Snapshot:
    time: float
    step: int
    Q: np.ndarray
    Qaux: np.ndarray
    field_names: tuple
    aux_names: tuple


@dataclass
class RunResult:
    """Final state (ghost columns included) and run bookkeeping."""

    Q: np.ndarray
    Qaux: np.ndarray
    t: float
    step: int
    dts: List[float] = field(default_factory=list)
    newton: Optional[NewtonResult] = None
    corrector_iterations: List[int] = field(default_factory=list)


def initial_state(model: ModelDef, mesh: Mesh, params=None):
    """Evaluate the initial condition at every cell centroid (ghosts included)."""
    params = as_params(model, params)
    X = coords_array(mesh.centroids)
    shape = (model.n_fields, mesh.n_cells)
    Q = np.broadcast_to(model.kernels.initial_condition(0.0, X, np.zeros(shape), None, params), shape).copy()
    A = np.zeros((model.n_aux, mesh.n_cells))
    if model.n_aux:
        A = np.broadcast_to(model.kernels.aux_initial(0.0, X, Q, A, params), A.shape).copy()
    return Q, A


def snapshot(model: ModelDef, mesh: Mesh, t, step, Q, Qaux) -> Snapshot:
    n = mesh.n_inner
    return Snapshot(float(t), int(step), Q[:, :n].copy(), Qaux[:, :n].copy(),
                    model.field_names, model.aux_names)


def _close(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


class _Clock:
    """Time stepping bookkeeping: dt clipping onto output times and t_end."""

    def __init__(self, settings: SolverSettings, t0: float, step0: int, dt_sequence):
        self.s = settings
        self.t = float(t0)
        self.step = int(step0)
        self.seq = None if dt_sequence is None else list(dt_sequence)
        iv = settings.output_interval
        self.next_out = None
        if iv is not None:
            # k * interval rather than a running sum, so output times do not drift
            self.k_out = int(np.floor(self.t / iv + 1e-9)) + 1
            self.next_out = self.k_out * iv

    def running(self) -> bool:
        if self.s.max_steps is not None and self.step >= self.s.max_steps:
            return False
        if self.seq is not None and self.step >= len(self.seq):
            return False
        return self.t < self.s.t_end and not _close(self.t, self.s.t_end)

    def pick(self, adaptive: Callable[[], float]) -> float:
        if self.seq is not None:
            return float(self.seq[self.step])
        if self.s.fixed_dt is not None:
            dt = self.s.fixed_dt
        else:
            dt = adaptive()
        target = self.s.t_end
        if self.next_out is not None:
            target = min(target, self.next_out)
        if self.t + dt >= target or _close(self.t + dt, target):
            dt = target - self.t
        return dt

    def advance(self, dt) -> bool:
        """Move the clock; True when an output time (or t_end) was reached."""
        self.step += 1
        hit = False
        if self.seq is None:
            for target in (self.s.t_end, self.next_out):
                if target is not None and _close(self.t + dt, target):
                    self.t = float(target)
                    hit = True
                    break
            else:
                self.t += dt
        else:
            self.t += dt
        if self.next_out is not None and (self.t > self.next_out or _close(self.t, self.next_out)):
            while self.next_out <= self.t or _close(self.t, self.next_out):
                self.k_out += 1
                self.next_out = self.k_out * self.s.output_interval
            hit = True
        return hit or _close(self.t, self.s.t_end)


def transient_hyperbolic_solve(mesh: Mesh, model: ModelDef, settings: SolverSettings,
                               io_sink: Optional[Callable[[Snapshot], None]] = None, params=None,
                               Q0=None, Qaux0=None, t0: float = 0.0, step0: int = 0,
                               dt_sequence: Optional[Sequence[float]] = None,
                               log: Optional[Callable[[str], None]] = None) -> RunResult:
    """Loop: ghosts, aux update, dt, hyperbolic step, source step."""
    params = as_params(model, params)
    bop = BoundaryOperator(model, mesh)
    aux = AuxUpdater(model, mesh)
    X = coords_array(mesh.centroids)
    if Q0 is None:
        Q, Qaux = initial_state(model, mesh, params)
    else:
        Q = np.array(Q0, dtype=float, copy=True)
        Qaux = np.array(Qaux0, dtype=float, copy=True) if Qaux0 is not None else initial_state(model, mesh, params)[1]
    clock = _Clock(settings, t0, step0, dt_sequence)
    Q = bop(clock.t, Q, Qaux, params)
    Qaux = aux(clock.t, Q, Qaux, params)
    if io_sink is not None and Q0 is None:
        io_sink(snapshot(model, mesh, clock.t, clock.step, Q, Qaux))
    dts = []
    written = True
    source = step_source_implicit if settings.implicit_source else step_source
    while clock.running():
        try:
            Q = bop(clock.t, Q, Qaux, params)
            Qaux = aux(clock.t, Q, Qaux, params)
            dt = clock.pick(lambda: compute_dt(mesh, model, Q, Qaux, params, settings.cfl))
            Q = hyperbolic_step(mesh, model, Q, Qaux, params, dt)
            Q = source(model, Q, Qaux, params, dt, mesh.n_inner, clock.t, X)
        except Exception as exc:
            raise SolveError(f"step {clock.step + 1} failed at t={clock.t:.6g}: {exc}", clock.t, clock.step) from exc
        dts.append(dt)
        written = clock.advance(dt)
        if log is not None:
            log(f"step {clock.step:6d}  t={clock.t:.6e}  dt={dt:.6e}")
        if written and io_sink is not None:
            Q = bop(clock.t, Q, Qaux, params)
            Qaux = aux(clock.t, Q, Qaux, params)
            io_sink(snapshot(model, mesh, clock.t, clock.step, Q, Qaux))
    Q = bop(clock.t, Q, Qaux, params)
    Qaux = aux(clock.t, Q, Qaux, params)
    if not written and io_sink is not None:
        io_sink(snapshot(model, mesh, clock.t, clock.step, Q, Qaux))
    return RunResult(Q, Qaux, clock.t, clock.step, dts)


def residual_operator(mesh: Mesh, model: ModelDef, params, t: float = 0.0, Qaux0=None):
    """R(Q) with ghosts filled, aux reconstructed and ghost rows zeroed.

    Returns ``(residual_fn, state)`` where ``state['Qaux']`` tracks the aux
    fields of the latest evaluation.
    """
    params = as_params(model, params)
    bop = BoundaryOperator(model, mesh)
    aux = AuxUpdater(model, mesh)
    X = coords_array(mesh.centroids)
    state = {"Qaux": np.zeros((model.n_aux, mesh.n_cells)) if Qaux0 is None else np.array(Qaux0, dtype=float)}
    kern = model.kernels.residual

    def residual_fn(Q):
        Q = bop(t, Q, state["Qaux"], params)
        A = aux(t, Q, state["Qaux"], params)
        Q = bop(t, Q, A, params)
        state["Qaux"] = A
        R = kern(t, X, Q, A, params)
        R = np.broadcast_to(R, Q.shape).copy()
        R[:, mesh.n_inner :] = 0.0
        return R

    return residual_fn, state


def steady_residual_solve(mesh: Mesh, model: ModelDef, settings: Optional[SolverSettings] = None,
                          params=None, Q0=None) -> RunResult:
    settings = settings or SolverSettings()
    params = as_params(model, params)
    Q, Qaux = initial_state(model, mesh, params) if Q0 is None else (np.array(Q0, dtype=float), None)
    residual_fn, state = residual_operator(mesh, model, params, Qaux0=Qaux)
    try:
        res = newton_solve(residual_fn, Q, settings.newton, settings.gmres)
    except Exception as exc:
        raise SolveError(f"steady solve failed: {exc}") from exc
    bop = BoundaryOperator(model, mesh)
    Qf = bop(0.0, res.x, state["Qaux"], params)
    residual_fn(Qf)
    return RunResult(Qf, state["Qaux"], 0.0, res.iterations, newton=res)


def vam_solve(mesh: Mesh, predictor: ModelDef, corrector: ModelDef, settings: SolverSettings,
              io_sink: Optional[Callable[[Snapshot], None]] = None, params=None, corrector_params=None,
              Q0=None, Qaux0=None, t0: float = 0.0, step0: int = 0, skip_corrector: bool = False,
              dt_sequence: Optional[Sequence[float]] = None,
              log: Optional[Callable[[str], None]] = None) -> RunResult:
    """Hydrostatic predictor, pressure correction solve, non-hydrostatic update."""
    if mesh.dimension != 1:
        raise ValueError("the VAM solver is one-dimensional")
    params = as_params(predictor, params)
    cparams = as_params(corrector, corrector_params).copy()
    dt_slot = corrector.layout.param_names.index("dt")
    bop = BoundaryOperator(predictor, mesh)
    aux = AuxUpdater(predictor, mesh)
    X = coords_array(mesh.centroids)
    cbop = BoundaryOperator(corrector, mesh)
    caux = AuxUpdater(corrector, mesh)
    ckern = corrector.kernels.residual
    copy_in = [corrector.aux_names.index(k) for k in predictor.field_names]
    b_c = corrector.aux_names.index("b")
    b_p = predictor.aux_names.index("b")
    p_slots = [predictor.aux_names.index(k) for k in corrector.field_names]

    if Q0 is None:
        Q, Qaux = initial_state(predictor, mesh, params)
    else:
        Q = np.array(Q0, dtype=float, copy=True)
        Qaux = np.array(Qaux0, dtype=float, copy=True)
    P = Qaux[p_slots].copy()
    Caux = np.zeros((corrector.n_aux, mesh.n_cells))
    clock = _Clock(settings, t0, step0, dt_sequence)
    Q = bop(clock.t, Q, Qaux, params)
    Qaux = aux(clock.t, Q, Qaux, params)
    if io_sink is not None and Q0 is None:
        io_sink(snapshot(predictor, mesh, clock.t, clock.step, Q, Qaux))
    dts, iters = [], []
    written = True

    def corrector_residual(Pc):
        Pc = cbop(clock.t, Pc, Caux, cparams)
        A = caux(clock.t, Pc, Caux, cparams, "state")
        Pc = cbop(clock.t, Pc, A, cparams)
        R = ckern(clock.t, X, Pc, A, cparams)
        R[:, mesh.n_inner :] = 0.0
        return R

    while clock.running():
        try:
            Q = bop(clock.t, Q, Qaux, params)
            Qaux = aux(clock.t, Q, Qaux, params)
            dt = clock.pick(lambda: compute_dt(mesh, predictor, Q, Qaux, params, settings.cfl))
            Qs = hyperbolic_step(mesh, predictor, Q, Qaux, params, dt)
            Qs = bop(clock.t, Qs, Qaux, params)
            if not skip_corrector:
                Caux[copy_in] = Qs
                Caux[b_c] = Qaux[b_p]
                cparams[dt_slot] = dt
                Caux[:] = caux(clock.t, P, Caux, cparams, "static")
                res = newton_solve(corrector_residual, P, settings.newton, settings.gmres)
                P = cbop(clock.t, res.x, Caux, cparams)
                iters.append(res.iterations)
                Qaux[p_slots] = P
            Qaux = aux(clock.t, Qs, Qaux, params)
            Q = step_source(predictor, Qs, Qaux, params, dt, mesh.n_inner, clock.t, X)
        except Exception as exc:
            raise SolveError(f"step {clock.step + 1} failed at t={clock.t:.6g}: {exc}", clock.t, clock.step) from exc
        dts.append(dt)
        written = clock.advance(dt)
        if log is not None:
            log(f"step {clock.step:6d}  t={clock.t:.6e}  dt={dt:.6e}")
        if written and io_sink is not None:
            io_sink(snapshot(predictor, mesh, clock.t, clock.step, bop(clock.t, Q, Qaux, params), Qaux))
    Q = bop(clock.t, Q, Qaux, params)
    Qaux = aux(clock.t, Q, Qaux, params)
    if not written and io_sink is not None:
        io_sink(snapshot(predictor, mesh, clock.t, clock.step, Q, Qaux))
    return RunResult(Q, Qaux, clock.t, clock.step, dts, corrector_iterations=iters)
