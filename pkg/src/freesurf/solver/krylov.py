"""Restarted GMRES and matrix-free Newton."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .settings import GmresSettings, NewtonSettings


class GmresError(RuntimeError):
    def __init__(self, message, residual_norm):
        self.residual_norm = residual_norm
        super().__init__(f"{message} (residual norm {residual_norm:.3e})")


class NewtonError(RuntimeError):
    def __init__(self, message, iterations=0, residual_norm=float("nan")):
        self.iterations = iterations
        self.residual_norm = residual_norm
        super().__init__(message)


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    r = np.hypot(a, b)
    return a / r, b / r


def gmres(apply_A: Callable[[np.ndarray], np.ndarray], b, x0=None, tol: float = 1e-10,
          restart: int = 200, max_iter: int = 4000, history: Optional[List[float]] = None) -> np.ndarray:
    """Solve A x = b for a linear operator given by its action.

    Stops when the least-squares residual estimate drops to ``tol * |b|``
    (``tol`` absolute when b = 0). ``history`` collects residual norms, one per
    inner iteration plus one per restart.
    """
    b = np.asarray(b, dtype=float)
    shape = b.shape
    b = b.ravel()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float).ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0 and x0 is None:
        return x.reshape(shape)
    target = tol * bnorm if bnorm > 0 else tol
    A = lambda v: np.asarray(apply_A(v.reshape(shape)), dtype=float).ravel()
    done = 0
    beta = np.inf
    while done < max_iter:
        r = b - A(x)
        beta = np.linalg.norm(r)
        if history is not None:
            history.append(beta)
        if beta <= target:
            return x.reshape(shape)
        m = min(restart, max_iter - done, b.size)
        V = np.zeros((m + 1, b.size))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[0] = r / beta
        k_used = 0
        for k in range(m):
            w = A(V[k])
            # modified Gram-Schmidt, twice for stability
            for _ in range(2):
                for j in range(k + 1):
                    hj = np.dot(V[j], w)
                    H[j, k] += hj
                    w = w - hj * V[j]
            H[k + 1, k] = np.linalg.norm(w)
            for j in range(k):
                t = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
                H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
                H[j, k] = t
            cs[k], sn[k] = _givens(H[k, k], H[k + 1, k])
            H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            k_used = k + 1
            done += 1
            res = abs(g[k + 1])
            if history is not None:
                history.append(res)
            breakdown = np.linalg.norm(w) <= 1e-14 * beta
            if res <= target or breakdown:
                break
            V[k + 1] = w / np.linalg.norm(w)
        y = np.zeros(k_used)
        for i in range(k_used - 1, -1, -1):
            y[i] = (g[i] - np.dot(H[i, i + 1 : k_used], y[i + 1 :])) / H[i, i]
        x = x + V[:k_used].T @ y
        if abs(g[k_used]) <= target:
            return x.reshape(shape)
    r = b - A(x)
    raise GmresError(f"GMRES did not converge in {max_iter} iterations", float(np.linalg.norm(r)))


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    history: List[float]


def fd_jvp(residual_fn, Q, RQ, v, epsilon=None):
    """Forward-difference directional derivative (R(Q + eps v) - R(Q)) / eps."""
    vnorm = max(np.max(np.abs(v)), 1e-30)
    if epsilon is None:
        eps = np.sqrt(np.finfo(float).eps) * (1.0 + np.max(np.abs(Q))) / vnorm
    else:
        eps = epsilon / vnorm
    return (residual_fn(Q + eps * v) - RQ) / eps


def newton_solve(residual_fn: Callable[[np.ndarray], np.ndarray], Q0,
                 newton: Optional[NewtonSettings] = None, gmres_settings: Optional[GmresSettings] = None) -> NewtonResult:
    """Undamped Newton with finite-difference Jacobian-vector products and GMRES."""
    newton = newton or NewtonSettings()
    gs = gmres_settings or GmresSettings()
    Q = np.array(Q0, dtype=float, copy=True)
    R = np.asarray(residual_fn(Q), dtype=float)
    norm0 = float(np.max(np.abs(R))) if R.size else 0.0
    if not np.isfinite(norm0):
        raise NewtonError("non-finite residual at the initial guess")
    history = [norm0]
    norm = norm0
    it = 0
    while True:
        if norm <= newton.tol_abs or norm <= newton.tol_rel * norm0:
            return NewtonResult(Q, it, norm, history)
        if it >= newton.max_iter:
            raise NewtonError(f"Newton did not converge in {it} iterations (residual {norm:.3e})", it, norm)
        J = lambda v, Q=Q, R=R: fd_jvp(residual_fn, Q, R, v, newton.fd_epsilon)
        try:
            dQ = gmres(J, -R, tol=gs.tol, restart=gs.restart, max_iter=gs.max_iter)
        except GmresError as exc:
            raise NewtonError(f"linear solve failed in Newton iteration {it + 1}: {exc}", it, norm) from exc
        Q = Q + dQ
        R = np.asarray(residual_fn(Q), dtype=float)
        it += 1
        norm = float(np.max(np.abs(R)))
        history.append(norm)
        if not np.isfinite(norm):
            raise NewtonError(f"non-finite residual after Newton iteration {it}", it, norm)
