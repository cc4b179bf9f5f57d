"""Shifted Legendre basis on [0, 1] and the exact moment tensors of the SME hierarchy."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class RationalPoly:
    """Polynomial in zeta with exact rational coefficients, lowest degree first."""

    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, c) -> "RationalPoly":
        return cls((Fraction(c),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RationalPoly(tuple(x + y for x, y in zip(a, b)))

    def scale(self, s) -> "RationalPoly":
        s = Fraction(s)
        return RationalPoly(tuple(s * c for c in self.coeffs))

    def __mul__(self, other: "RationalPoly") -> "RationalPoly":
        return poly_mul(self, other)

    def __call__(self, zeta: float) -> float:
        return eval_poly(self, zeta)


def poly_mul(p: RationalPoly, q: RationalPoly) -> RationalPoly:
    if not p.coeffs or not q.coeffs:
        return RationalPoly(())
    out = [Fraction(0)] * (len(p.coeffs) + len(q.coeffs) - 1)
    for i, a in enumerate(p.coeffs):
        for j, b in enumerate(q.coeffs):
            out[i + j] += a * b
    return RationalPoly(tuple(out))


def poly_diff(p: RationalPoly) -> RationalPoly:
    return RationalPoly(tuple(k * c for k, c in enumerate(p.coeffs) if k > 0))


def poly_antiderivative(p: RationalPoly) -> RationalPoly:
    """Antiderivative with zero constant of integration, so that P(0) = 0."""
    return RationalPoly((Fraction(0),) + tuple(c / (k + 1) for k, c in enumerate(p.coeffs)))


def poly_integrate_definite(p: RationalPoly) -> Fraction:
    """Exact integral over [0, 1]."""
    return sum((c / (k + 1) for k, c in enumerate(p.coeffs)), Fraction(0))


def eval_poly(p: RationalPoly, zeta: float) -> float:
    acc = 0.0
    for c in reversed(p.coeffs):
        acc = acc * zeta + float(c)
    return acc


@lru_cache(maxsize=None)
def legendre_shifted(k: int) -> RationalPoly:
    """P_k(2 zeta - 1) from the three-term recurrence, normalised to phi_k(1) = 1."""
    if k < 0:
        raise ValueError("basis index must be non-negative")
    x = RationalPoly((Fraction(-1), Fraction(2)))
    if k == 0:
        return RationalPoly.constant(1)
    if k == 1:
        return x
    prev, cur = RationalPoly.constant(1), x
    for n in range(1, k):
        # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        nxt = (poly_mul(x, cur).scale(2 * n + 1) + prev.scale(-n)).scale(Fraction(1, n + 1))
        prev, cur = cur, nxt
    return cur


def eval_basis(k: int, zeta: float) -> float:
    return eval_poly(legendre_shifted(k), zeta)


@dataclass(frozen=True)
class MomentTensors:
    """Exact inner products of the basis on [0, 1].

    M[k]       = <phi_k, phi_k>
    A[i][j][k] = <phi_i phi_j, phi_k>
    B[k][i][j] = <phi_k' Phi_j phi_i>,  Phi_j the antiderivative of phi_j
    D[i][k]    = <phi_i', phi_k'>
    """

    N: int
    M: Tuple[Fraction, ...]
    A: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    B: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    D: Tuple[Tuple[Fraction, ...], ...]
    phi0: Tuple[Fraction, ...]

    def as_arrays(self):
        """Float copies (M, A, B, D) for numeric work."""
        f = np.vectorize(float, otypes=[float])
        return (
            f(np.array(self.M, dtype=object)),
            f(np.array(self.A, dtype=object)),
            f(np.array(self.B, dtype=object)),
            f(np.array(self.D, dtype=object)),
        )


def tensors_from_basis(basis: Sequence[RationalPoly]) -> MomentTensors:
    """Moment tensors for an arbitrary list of polynomial basis functions."""
    n = len(basis)
    d = [poly_diff(p) for p in basis]
    anti = [poly_antiderivative(p) for p in basis]
    ip = poly_integrate_definite
    M = tuple(ip(poly_mul(basis[k], basis[k])) for k in range(n))
    pair = [[poly_mul(basis[i], basis[j]) for j in range(n)] for i in range(n)]
    A = tuple(
        tuple(tuple(ip(poly_mul(pair[i][j], basis[k])) for k in range(n)) for j in range(n))
        for i in range(n)
    )
    B = tuple(
        tuple(tuple(ip(poly_mul(poly_mul(d[k], anti[j]), basis[i])) for j in range(n)) for i in range(n))
        for k in range(n)
    )
    D = tuple(tuple(ip(poly_mul(d[i], d[k])) for k in range(n)) for i in range(n))
    phi0 = tuple(p.coeffs[0] if p.coeffs else Fraction(0) for p in basis)
    return MomentTensors(n - 1, M, A, B, D, phi0)


@lru_cache(maxsize=None)
def moment_tensors(N: int) -> MomentTensors:
    if N < 0:
        raise ValueError("hierarchy level must be non-negative")
    return tensors_from_basis([legendre_shifted(k) for k in range(N + 1)])
