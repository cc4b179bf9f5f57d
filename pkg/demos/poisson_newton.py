"""Steady Poisson problem solved with the matrix-free Newton-GMRES engine.

-T'' + f = 0 on [0, 1], T(0) = 1, T(1) = 2. With f = 2 the solution is
x^2 + 1, a quadratic, so a degree-2 reconstruction reproduces it to roundoff.
The Laplace case f = 0 gives the straight line 1 + x.
"""
import numpy as np

from freesurf import SolverSettings, poisson_model, steady_residual_solve, uniform_interval

for f, exact, label in ((2.0, lambda x: x**2 + 1, "x^2 + 1"), (0.0, lambda x: 1 + x, "1 + x")):
    for n in (10, 100, 400):
        mesh = uniform_interval(0, 1, n)
        res = steady_residual_solve(mesh, poisson_model(source=f), SolverSettings())
        x = mesh.centroids[:n, 0]
        err = np.abs(res.Q[0, :n] - exact(x)).max()
        hist = ", ".join(f"{r:.1e}" for r in res.newton.history)
        print(f"f = {f:g} (T = {label}), n = {n:3d}: max error {err:.2e}; |R| per Newton step: {hist}")
