"""Wave speeds of the quasilinear system  A(Q) n = (dF/dQ + N) n."""
from __future__ import annotations

import numpy as np

from .core import ModelDef, as_params

HYPERBOLICITY_TOL = 1e-8


class EigenvalueError(RuntimeError):
    pass


class HyperbolicityError(EigenvalueError):
    """The quasilinear matrix has a complex eigenvalue pair."""


def quasilinear_matrices(model: ModelDef, Q, Qaux, params, normals) -> np.ndarray:
    """Stack of (A . n) matrices, shape (n_cells, n_fields, n_fields).

    ``Q`` is (n_fields, n_cells); ``normals`` is (dim, n_cells) or (dim,).
    """
    Q = np.asarray(Q, dtype=float)
    ncell = Q.shape[1]
    normals = np.asarray(normals, dtype=float)
    if normals.ndim == 1:
        normals = np.repeat(normals[:, None], ncell, axis=1)
    n = model.n_fields
    A = np.zeros((n * n, ncell))
    for d in range(model.dimension):
        A += model.kernels.quasilinear(d)(0.0, None, Q, Qaux, params) * normals[d]
    return A.T.reshape(ncell, n, n)


def numeric_eigenvalues(mats: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a stack of matrices, ascending per matrix."""
    if not np.all(np.isfinite(mats)):
        raise EigenvalueError("quasilinear matrix has non-finite entries")
    try:
        lam = np.linalg.eigvals(mats)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue iteration did not converge: {exc}") from None
    radius = np.max(np.abs(lam), axis=-1, keepdims=True)
    bad = np.abs(lam.imag) > HYPERBOLICITY_TOL * np.maximum(radius, 1e-300)
    if np.any(bad):
        cell = int(np.argwhere(bad.any(axis=-1))[0][0])
        raise HyperbolicityError(
            f"loss of hyperbolicity: complex eigenvalues {lam[cell][bad[cell]]} in cell {cell}"
        )
    return np.sort(lam.real, axis=-1)


def eigenvalue_stack(model: ModelDef, Q, Qaux, params, normals, method: str = "auto") -> np.ndarray:
    """Eigenvalues per cell, shape (n_cells, n_eig), ascending."""
    params = as_params(model, params)
    Q = np.asarray(Q, dtype=float)
    if method not in ("auto", "closed", "numeric"):
        raise ValueError(f"unknown eigenvalue method {method!r}")
    kern = model.kernels.eigenvalues
    if method == "closed" and kern is None:
        raise EigenvalueError(f"model {model.name!r} has no closed-form eigenvalues")
    if kern is not None and method != "numeric":
        normals = np.asarray(normals, dtype=float)
        if normals.ndim == 1:
            normals = np.repeat(normals[:, None], Q.shape[1], axis=1)
        N = np.zeros((2, Q.shape[1]))
        N[: normals.shape[0]] = normals
        lam = kern(0.0, None, Q, Qaux, params, N).T
        if not np.all(np.isfinite(lam)):
            raise EigenvalueError("non-finite eigenvalue")
        return np.sort(lam, axis=-1)
    return numeric_eigenvalues(quasilinear_matrices(model, Q, Qaux, params, normals))


def quasilinear_eigenvalues(model: ModelDef, Q_cell, Qaux_cell, params, n, method: str = "auto") -> np.ndarray:
    """Sorted real eigenvalues of (dF/dQ + N) n at a single state."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    Q = np.asarray(Q_cell, dtype=float).reshape(-1, 1)
    A = None if Qaux_cell is None else np.asarray(Qaux_cell, dtype=float).reshape(-1, 1)
    if A is None:
        A = np.zeros((model.n_aux, 1))
    return eigenvalue_stack(model, Q, A, params, n, method)[0]


def max_wave_speed(model: ModelDef, Q, Qaux, params, normals, method: str = "auto") -> np.ndarray:
    """max |lambda| per column."""
    lam = eigenvalue_stack(model, Q, Qaux, params, normals, method)
    return np.max(np.abs(lam), axis=-1)
