"""Subdivision of the reference triangle into N_k subcells.

Four schemes are available. The structured ones cut the triangle along lines
parallel to the two sides meeting at the first reference vertex, so every
subcell is a triangle or a parallelogram and interior subcell faces are
parallel to primal edges. The polygonal ones take the median dual of the
triangulated P^k Lagrange lattice.

The first reference vertex is expected to carry the widest angle of the
physical cell; the mesh layer reorders vertices accordingly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .basis import dim_p
from .errors import DegenerateSubcell, DisconnectedGraph, UnsupportedOrder
from .quadrature import gauss_lobatto_points, polygon_area, polygon_centroid


class SubdivisionScheme(str, Enum):
    STRUCTURED_UNIFORM = "structured_uniform"
    STRUCTURED_GAUSS_LOBATTO = "structured_gauss_lobatto"
    VORONOI_UNIFORM = "voronoi_uniform"
    VORONOI_LAGRANGE_MID = "voronoi_lagrange_mid"

    @property
    def max_order(self) -> int:
        return 5 if self.name.startswith("STRUCTURED") else 3

    @property
    def min_order(self) -> int:
        return 0 if self.name.startswith("STRUCTURED") else 1

    @classmethod
    def parse(cls, value: "str | SubdivisionScheme") -> "SubdivisionScheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "uniform": cls.STRUCTURED_UNIFORM,
            "structured": cls.STRUCTURED_UNIFORM,
            "gauss_lobatto": cls.STRUCTURED_GAUSS_LOBATTO,
            "gl": cls.STRUCTURED_GAUSS_LOBATTO,
            "voronoi": cls.VORONOI_UNIFORM,
            "lagrange_mid": cls.VORONOI_LAGRANGE_MID,
        }
        if key in aliases:
            return aliases[key]
        return cls(key)


# reference edges run counter-clockwise: e0 = v0->v1, e1 = v1->v2, e2 = v2->v0
REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def edge_point(e: int, t: np.ndarray | float) -> np.ndarray:
    """Reference coordinates of parameter t along reference edge e."""
    a = REFERENCE_VERTICES[e]
    b = REFERENCE_VERTICES[(e + 1) % 3]
    t = np.asarray(t, float)
    return a + t[..., None] * (b - a)


def _edge_param(p: np.ndarray, tol: float = 1e-12) -> tuple[int, float] | None:
    x, y = p
    if abs(y) < tol:
        return 0, x
    if abs(x + y - 1.0) < tol:
        return 1, y
    if abs(x) < tol:
        return 2, 1.0 - y
    return None


@dataclass
class SubcellTopology:
    """Reference-cell subdivision and its subcell adjacency.

    ``interior_faces[f] = (m, p)`` with ``m < p``; the face segment runs from
    ``points[face_points[f, 0]]`` to ``points[face_points[f, 1]]`` and subcell
    m lies on its left, so the right-hand normal points from m into p.
    ``boundary_subfaces[e]`` lists ``(m, t0, t1)`` along reference edge e in
    increasing t.
    """

    scheme: SubdivisionScheme
    k: int
    points: np.ndarray
    polygons: list[np.ndarray]
    interior_faces: np.ndarray
    face_points: np.ndarray
    boundary_subfaces: list[list[tuple[int, float, float]]]
    areas: np.ndarray = field(init=False)
    centroids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.areas = np.array([polygon_area(self.points[p]) for p in self.polygons])
        self.centroids = np.array([polygon_centroid(self.points[p]) for p in self.polygons])

    @property
    def n_subcells(self) -> int:
        return len(self.polygons)

    @property
    def n_interior_faces(self) -> int:
        return len(self.interior_faces)

    def incidence(self) -> np.ndarray:
        """Signed subcell/face incidence matrix, shape (n_subcells, n_faces)."""
        a = np.zeros((self.n_subcells, self.n_interior_faces))
        f = np.arange(self.n_interior_faces)
        a[self.interior_faces[:, 0], f] = 1.0
        a[self.interior_faces[:, 1], f] = -1.0
        return a

    def edge_breaks(self) -> np.ndarray:
        """Breakpoints of the boundary subfaces along an edge (same on all edges)."""
        sub = self.boundary_subfaces[0]
        return np.array([s[1] for s in sub] + [sub[-1][2]])

    def face_segments(self) -> np.ndarray:
        """Reference endpoints of interior faces, shape (n_faces, 2, 2)."""
        return self.points[self.face_points]

    def subcell_perimeters(self) -> np.ndarray:
        out = np.zeros(self.n_subcells)
        for m, poly in enumerate(self.polygons):
            v = self.points[poly]
            out[m] = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum()
        return out


def _structured_polygons(k: int, grid: np.ndarray):
    index = {}
    pts = []
    for i in range(k + 2):
        for j in range(k + 2 - i):
            index[(i, j)] = len(pts)
            pts.append((grid[i], grid[j]))
    polys = []
    for i in range(k + 1):
        for j in range(k + 1 - i):
            if i + j <= k - 1:
                ids = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            else:
                ids = [(i, j), (i + 1, j), (i, j + 1)]
            polys.append(np.array([index[x] for x in ids]))
    return np.array(pts, float), polys


def _dual_polygons(k: int, uniform_boundary: bool):
    """Median-dual cells of the P^k lattice, built from kites and merged."""
    scale = 6 * k
    nodes = [(i, j) for j in range(k + 1) for i in range(k + 1 - j)]
    node_id = {n: m for m, n in enumerate(nodes)}
    tris = []
    for j in range(k):
        for i in range(k - j):
            tris.append(((i, j), (i + 1, j), (i, j + 1)))
            if i + j <= k - 2:
                tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))

    def key(*ps):
        # integer coordinates in units of 1 / (6k)
        n = len(ps)
        sx = sum(p[0] for p in ps) * 6 // n
        sy = sum(p[1] for p in ps) * 6 // n
        return (sx, sy)

    edges_of = {m: [] for m in range(len(nodes))}
    for tri in tris:
        cen = key(*tri)
        for a in range(3):
            va, vb, vc = tri[a], tri[(a + 1) % 3], tri[(a + 2) % 3]
            kite = [key(va), key(va, vb), cen, key(va, vc)]
            for q in range(4):
                edges_of[node_id[va]].append((kite[q], kite[(q + 1) % 4]))

    point_keys: dict[tuple[int, int], int] = {}
    polys_keys = []
    for m in range(len(nodes)):
        es = edges_of[m]
        s = set(es)
        boundary = [e for e in es if (e[1], e[0]) not in s]
        nxt = {a: b for a, b in boundary}
        start = boundary[0][0]
        loop = [start]
        cur = nxt[start]
        while cur != start:
            loop.append(cur)
            cur = nxt[cur]
        # drop collinear vertices lying on a reference edge
        keep = []
        nl = len(loop)
        for q in range(nl):
            p0, p1, p2 = loop[q - 1], loop[q], loop[(q + 1) % nl]
            cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0])
            if cross != 0:
                keep.append(p1)
        polys_keys.append(keep)
        for p in keep:
            point_keys.setdefault(p, len(point_keys))

    pts = np.array(
        [[Fraction(x, scale), Fraction(y, scale)] for (x, y) in point_keys], dtype=float
    )
    if uniform_boundary:
        native = np.array([(2 * i + 1) / (2 * k) for i in range(k)])
        target = np.array([(i + 1) / (k + 1) for i in range(k)])
        for q in range(len(pts)):
            loc = _edge_param(pts[q])
            if loc is None:
                continue
            e, t = loc
            hit = np.flatnonzero(np.abs(native - t) < 1e-12)
            if hit.size:
                pts[q] = edge_point(e, target[hit[0]])
    polys = [np.array([point_keys[p] for p in poly]) for poly in polys_keys]
    return pts, polys


def _faces_from_polygons(points: np.ndarray, polys: list[np.ndarray]):
    owner: dict[tuple[int, int], int] = {}
    for m, poly in enumerate(polys):
        n = len(poly)
        for q in range(n):
            owner[(int(poly[q]), int(poly[(q + 1) % n]))] = m
    faces, fpts = [], []
    bnd: list[list[tuple[int, float, float]]] = [[], [], []]
    for (a, b), m in owner.items():
        p = owner.get((b, a))
        if p is not None:
            if m < p:
                faces.append((m, p))
                fpts.append((a, b))
            continue
        la, lb = _edge_param(points[a]), _edge_param(points[b])
        e = None
        for cand in range(3):
            ta = _param_on_edge(points[a], cand)
            tb = _param_on_edge(points[b], cand)
            if ta is not None and tb is not None and tb > ta:
                e = cand
                break
        if e is None or la is None or lb is None:
            raise DegenerateSubcell("unmatched subcell edge inside the reference cell")
        bnd[e].append((m, _param_on_edge(points[a], e), _param_on_edge(points[b], e)))
    order = np.lexsort((np.array([f[1] for f in faces]), np.array([f[0] for f in faces])))
    faces = np.array(faces, dtype=int).reshape(-1, 2)[order]
    fpts = np.array(fpts, dtype=int).reshape(-1, 2)[order]
    for e in range(3):
        bnd[e].sort(key=lambda s: s[1])
    return faces, fpts, bnd


def _param_on_edge(p: np.ndarray, e: int, tol: float = 1e-12) -> float | None:
    x, y = p
    if e == 0 and abs(y) < tol:
        return float(x)
    if e == 1 and abs(x + y - 1.0) < tol:
        return float(y)
    if e == 2 and abs(x) < tol:
        return float(1.0 - y)
    return None


def build_subdivision(scheme: "SubdivisionScheme | str", k: int) -> SubcellTopology:
    """Build the reference subdivision for ``scheme`` at polynomial degree ``k``."""
    scheme = SubdivisionScheme.parse(scheme)
    if k < scheme.min_order or k > scheme.max_order:
        raise UnsupportedOrder(
            f"{scheme.value} supports degrees {scheme.min_order}..{scheme.max_order}, got {k}"
        )
    if k == 0:
        pts = REFERENCE_VERTICES.copy()
        polys = [np.array([0, 1, 2])]
    elif scheme is SubdivisionScheme.STRUCTURED_UNIFORM:
        pts, polys = _structured_polygons(k, np.linspace(0.0, 1.0, k + 2))
    elif scheme is SubdivisionScheme.STRUCTURED_GAUSS_LOBATTO:
        pts, polys = _structured_polygons(k, gauss_lobatto_points(k + 2))
    else:
        pts, polys = _dual_polygons(k, scheme is SubdivisionScheme.VORONOI_UNIFORM)
    faces, fpts, bnd = _faces_from_polygons(pts, polys)
    topo = SubcellTopology(scheme, k, pts, polys, faces, fpts, bnd)
    if len(polys) != dim_p(k):
        raise DegenerateSubcell(f"expected {dim_p(k)} subcells, built {len(polys)}")
    if np.any(topo.areas < 1e-13):
        raise DegenerateSubcell("subcell with non-positive area")
    if abs(topo.areas.sum() - 0.5) > 1e-13:
        raise DegenerateSubcell("subcells do not tile the reference triangle")
    breaks = [np.array([s[1] for s in b] + [b[-1][2]]) for b in bnd]
    for b in breaks[1:]:
        if len(b) != len(breaks[0]) or np.abs(b - breaks[0]).max() > 1e-13:
            raise DegenerateSubcell("edge subdivisions differ between reference edges")
    if np.abs(breaks[0] - (1.0 - breaks[0][::-1])).max() > 1e-13:
        raise DegenerateSubcell("edge subdivision is not symmetric")
    _check_connected(topo)
    return topo


def _check_connected(topo: SubcellTopology) -> None:
    n = topo.n_subcells
    seen = {0}
    stack = [0]
    adj = {m: set() for m in range(n)}
    for m, p in topo.interior_faces:
        adj[int(m)].add(int(p))
        adj[int(p)].add(int(m))
    while stack:
        m = stack.pop()
        for p in adj[m] - seen:
            seen.add(p)
            stack.append(p)
    if len(seen) != n:
        raise DisconnectedGraph("subcell adjacency graph is not connected")


def count_interior_faces(scheme: "SubdivisionScheme | str", k: int) -> int:
    return build_subdivision(scheme, k).n_interior_faces
