"""Quadrature rules on the unit interval and on the reference triangle.

The reference triangle has vertices (0, 0), (1, 0) and (0, 1), so its area
is 1/2 and every triangle rule below has weights summing to 1/2.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1] (exact to degree 2n - 1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def gauss_lobatto_points(n: int) -> np.ndarray:
    """The n Gauss-Lobatto points on [0, 1], endpoints included."""
    if n < 2:
        raise ValueError("Gauss-Lobatto rule needs at least 2 points")
    inner = np.polynomial.legendre.Legendre.basis(n - 1).deriv().roots()
    x = np.concatenate([[-1.0], np.sort(inner.real), [1.0]])
    x = 0.5 * (x + 1.0)
    # enforce exact symmetry
    return 0.5 * (x + (1.0 - x[::-1]))


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed-coordinate rule on the reference triangle, exact to ``degree``.

    Returns points of shape (n, 2) and positive weights of shape (n,).
    """
    n = max(1, (degree + 2) // 2)
    u, wu = gauss_legendre(n)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    v = 0.5 * (xj + 1.0)
    wv = wj / 4.0
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.stack([(uu * (1.0 - vv)).ravel(), vv.ravel()], axis=1)
    w = np.outer(wu, wv).ravel()
    return pts, w


def map_triangle_rule(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, degree: int
) -> tuple[np.ndarray, np.ndarray]:
    """Map the reference rule onto the triangle (a, b, c); weights carry |area|."""
    ref, w = triangle_rule(degree)
    a = np.asarray(a, float)
    e1 = np.asarray(b, float) - a
    e2 = np.asarray(c, float) - a
    det = abs(e1[0] * e2[1] - e1[1] * e2[0])
    pts = a + ref[:, :1] * e1 + ref[:, 1:] * e2
    return pts, w * det


def polygon_rule(vertices: np.ndarray, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on a star-shaped polygon by fanning from its vertex average."""
    vertices = np.asarray(vertices, float)
    centre = vertices.mean(axis=0)
    pts, ws = [], []
    nv = len(vertices)
    for i in range(nv):
        p, w = map_triangle_rule(centre, vertices[i], vertices[(i + 1) % nv], degree)
        pts.append(p)
        ws.append(w)
    return np.concatenate(pts), np.concatenate(ws)


def polygon_area(vertices: np.ndarray) -> float:
    """Signed shoelace area (positive for counter-clockwise ordering)."""
    v = np.asarray(vertices, float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)
