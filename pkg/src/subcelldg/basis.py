"""Orthonormal hierarchical polynomial basis on the reference triangle.

Monomials xi^a eta^b are ordered by total degree, then by decreasing power of
xi, and orthonormalised with Gram-Schmidt (done as an extended-precision
Cholesky factorisation of the exact monomial Gram matrix). The reference mass
matrix is therefore the identity and the basis of degree k is a prefix of the
basis of degree k + 1.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial

import mpmath
import numpy as np


def dim_p(k: int) -> int:
    """Dimension of the space of bivariate polynomials of degree <= k."""
    return (k + 1) * (k + 2) // 2


def monomial_exponents(k: int) -> np.ndarray:
    """Graded-lexicographic exponent pairs (a, b) with a + b <= k."""
    return np.array([(d - j, j) for d in range(k + 1) for j in range(d + 1)], dtype=int)


_CENTRE = 1.0 / 3.0


@lru_cache(maxsize=None)
def _gram_schmidt(k: int) -> np.ndarray:
    exps = monomial_exponents(k)
    n = len(exps)
    with mpmath.workdps(60):
        gram = mpmath.matrix(n, n)
        for i, (ai, bi) in enumerate(exps):
            for j, (aj, bj) in enumerate(exps):
                a, b = int(ai + aj), int(bi + bj)
                gram[i, j] = mpmath.mpf(factorial(a) * factorial(b)) / factorial(a + b + 2)
        low = mpmath.cholesky(gram)
        inv = low**-1
        # re-expand around the centroid to limit cancellation in floating point
        c = mpmath.mpf(1) / 3
        index = {(int(a), int(b)): i for i, (a, b) in enumerate(exps)}
        shift = mpmath.matrix(n, n)
        for i, (a, b) in enumerate(exps):
            for p in range(a + 1):
                for q in range(b + 1):
                    shift[i, index[(p, q)]] += (
                        mpmath.binomial(a, p) * mpmath.binomial(b, q) * c ** (a - p + b - q)
                    )
        full = inv * shift
        coeffs = np.array([[float(full[i, j]) for j in range(n)] for i in range(n)])
    return coeffs


class BasisSet:
    """Degree-k orthonormal basis with monomial coefficient representation."""

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("degree must be non-negative")
        self.k = k
        self.n = dim_p(k)
        self.exponents = monomial_exponents(k)
        self.coeffs = _gram_schmidt(k)

    def _monomials(self, pts: np.ndarray, dx: int = 0, dy: int = 0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        x, y = pts[:, 0] - _CENTRE, pts[:, 1] - _CENTRE
        a, b = self.exponents[:, 0], self.exponents[:, 1]
        fa = np.ones(len(a))
        fb = np.ones(len(b))
        for i in range(dx):
            fa = fa * (a - i)
        for i in range(dy):
            fb = fb * (b - i)
        # integer power tables: column j holds x**j
        px = np.cumprod(np.column_stack([np.ones_like(x)] + [x] * self.k), axis=1)
        py = np.cumprod(np.column_stack([np.ones_like(y)] + [y] * self.k), axis=1)
        pa = np.maximum(a - dx, 0)
        pb = np.maximum(b - dy, 0)
        return (fa * fb) * px[:, pa] * py[:, pb]

    def eval(self, pts: np.ndarray) -> np.ndarray:
        """Basis values, shape (npts, n)."""
        return self._monomials(pts) @ self.coeffs.T

    def grad(self, pts: np.ndarray) -> np.ndarray:
        """Reference gradients, shape (npts, n, 2)."""
        gx = self._monomials(pts, 1, 0) @ self.coeffs.T
        gy = self._monomials(pts, 0, 1) @ self.coeffs.T
        return np.stack([gx, gy], axis=-1)

    def hessian(self, pts: np.ndarray) -> np.ndarray:
        """Second derivatives (xx, xy, yy), shape (npts, n, 3)."""
        hxx = self._monomials(pts, 2, 0) @ self.coeffs.T
        hxy = self._monomials(pts, 1, 1) @ self.coeffs.T
        hyy = self._monomials(pts, 0, 2) @ self.coeffs.T
        return np.stack([hxx, hxy, hyy], axis=-1)


def build_basis(k: int) -> BasisSet:
    return BasisSet(k)
