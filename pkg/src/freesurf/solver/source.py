"""Explicit and implicit source-term steps  dQ/dt = S(Q)."""
from __future__ import annotations

import numpy as np

from ..model import ModelDef, as_params
from .krylov import NewtonError


def _inner(n_inner):
    return slice(None) if n_inner is None else slice(0, n_inner)


def step_source(model: ModelDef, Q, Qaux, params, dt, n_inner=None, t=0.0, X=None) -> np.ndarray:
    """Q' = Q + dt S(Q) on the first ``n_inner`` columns (all columns when None)."""
    params = as_params(model, params)
    Q = np.asarray(Q, dtype=float)
    sl = _inner(n_inner)
    out = Q.copy()
    Xs = None if X is None else X[:, sl]
    out[:, sl] = Q[:, sl] + dt * model.kernels.source(t, Xs, Q[:, sl], np.asarray(Qaux)[:, sl], params)
    return out


def step_source_implicit(model: ModelDef, Q, Qaux, params, dt, n_inner=None, t=0.0, X=None,
                         tol: float = 1e-13, max_iter: int = 25) -> np.ndarray:
    """Backward Euler  Q' - Q - dt S(Q') = 0, per cell Newton with the exact dS/dQ."""
    params = as_params(model, params)
    Q = np.asarray(Q, dtype=float)
    sl = _inner(n_inner)
    q0 = Q[:, sl]
    A = np.asarray(Qaux)[:, sl]
    Xs = None if X is None else X[:, sl]
    n = model.n_fields
    q = q0.copy()
    eye = np.eye(n)
    for it in range(max_iter + 1):
        G = q - q0 - dt * model.kernels.source(t, Xs, q, A, params)
        scale = 1.0 + np.max(np.abs(q0)) if q0.size else 1.0
        if np.max(np.abs(G), initial=0.0) <= tol * scale:
            out = Q.copy()
            out[:, sl] = q
            return out
        if it == max_iter:
            break
        J = model.kernels.source_jacobian(t, Xs, q, A, params).reshape(n, n, -1)
        M = eye[:, :, None] - dt * J
        dq = np.linalg.solve(np.moveaxis(M, 2, 0), -G.T[:, :, None])[:, :, 0].T
        q = q + dq
        if not np.all(np.isfinite(q)):
            break
    raise NewtonError(f"implicit source step did not converge in {max_iter} iterations", max_iter)
