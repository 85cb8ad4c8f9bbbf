"""One-dimensional subresolution functions and flux-correction coefficients.

On the unit interval split at nodes 0 = x_0 < x_1 < ... < x_{k+1} = 1, the
subresolution function of subinterval m is the polynomial of degree k whose
moments against 1, x, ..., x^k equal those of the indicator of
[x_{m-1}, x_m]. Writing it in the monomial basis leads to a Hilbert system.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.linalg import hilbert, invhilbert

from .errors import IllConditioned, InvalidNodes

MAX_ORDER = 9


def _check(k: int, nodes: np.ndarray) -> np.ndarray:
    if k < 0:
        raise ValueError("order must be non-negative")
    if k > MAX_ORDER:
        raise IllConditioned(f"Hilbert system of size {k + 1} is too ill-conditioned")
    nodes = np.asarray(nodes, float)
    if nodes.shape != (k + 2,):
        raise InvalidNodes(f"expected {k + 2} nodes, got {nodes.shape}")
    if abs(nodes[0]) > 1e-14 or abs(nodes[-1] - 1.0) > 1e-14 or np.any(np.diff(nodes) <= 0):
        raise InvalidNodes("nodes must increase strictly from 0 to 1")
    return nodes


def _powers(x: np.ndarray, k: int) -> np.ndarray:
    """Columns x^1 ... x^{k+1}."""
    return np.asarray(x, float)[..., None] ** np.arange(1, k + 2)


def subres_1d_basis(k: int, nodes: np.ndarray) -> np.ndarray:
    """Monomial coefficients, row m - 1 holds phi_m (coefficients of 1, x, ..., x^k)."""
    nodes = _check(k, nodes)
    scale = np.diag(1.0 / np.arange(1, k + 2))
    jumps = np.diff(_powers(nodes, k), axis=0)  # row m - 1: x_m^j - x_{m-1}^j
    rhs = scale @ jumps.T
    return np.linalg.solve(hilbert(k + 1), rhs).T


def boundary_weights(k: int) -> np.ndarray:
    """Values at x = 0 of the dual monomial functionals, Lambda H^-1 e_1."""
    if k > MAX_ORDER:
        raise IllConditioned(f"Hilbert system of size {k + 1} is too ill-conditioned")
    inv = invhilbert(k + 1, exact=k >= 7).astype(float)
    return inv[:, 0] / np.arange(1, k + 2)


def correction_coeffs_closed(k: int, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left and right face coefficients for m = 0..k+1 from the closed form."""
    nodes = _check(k, nodes)
    b = boundary_weights(k)
    left = 1.0 - _powers(nodes, k) @ b
    flipped = 1.0 - nodes[::-1]
    # mirror symmetry x -> 1 - x maps right-face sums onto left-face sums
    right = (1.0 - _powers(flipped, k) @ b)[::-1]
    return left, right


def subres_1d_basis_exact(k: int, nodes: np.ndarray) -> list[list[Fraction]]:
    """Rational-arithmetic version of :func:`subres_1d_basis`."""
    nodes = _check(k, nodes)
    x = [Fraction(float(v)) for v in nodes]
    inv = invhilbert(k + 1, exact=True)
    rows = []
    for m in range(1, k + 2):
        rhs = [(x[m] ** j - x[m - 1] ** j) / j for j in range(1, k + 2)]
        rows.append([sum(Fraction(int(inv[i, j])) * rhs[j] for j in range(k + 1)) for i in range(k + 1)])
    return rows


def correction_coeffs_direct(k: int, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Same coefficients from partial sums of subresolution values at 0 and 1.

    Evaluated in exact rational arithmetic so it can serve as a reference.
    """
    coeffs = subres_1d_basis_exact(k, nodes)
    at0 = [c[0] for c in coeffs]
    at1 = [sum(c) for c in coeffs]
    left = np.array([float(sum(at0[m:])) for m in range(k + 2)])
    right = np.array([float(sum(at1[:m])) for m in range(k + 2)])
    return left, right
