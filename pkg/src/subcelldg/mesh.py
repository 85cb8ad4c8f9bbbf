"""Conforming triangular meshes: generators, file loaders and face tables."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateGeometry, NonConforming, OrientationError, OrientationWarning, ParseError

log = logging.getLogger(__name__)

Classifier = Callable[[np.ndarray, np.ndarray], str]


@dataclass
class Mesh:
    """Triangle mesh with face connectivity.

    Each triangle's vertices are stored counter-clockwise with the vertex of
    widest angle first. Face f runs from ``face_nodes[f, 0]`` to
    ``face_nodes[f, 1]`` along local edge ``face_local[f, 0]`` of its left
    cell, so the right-hand normal points out of the left cell. Boundary faces
    have ``face_cells[f, 1] == -1`` and a tag name. Periodic faces are
    interior faces whose right cell lives at ``x + face_shift[f]``.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    face_nodes: np.ndarray = field(init=False)
    face_cells: np.ndarray = field(init=False)
    face_local: np.ndarray = field(init=False)
    face_tag: np.ndarray = field(init=False)
    face_shift: np.ndarray = field(init=False)
    cell_faces: np.ndarray = field(init=False)
    tag_names: list[str] = field(default_factory=list)
    boundary_classifier: Classifier | None = None

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, float)
        self.triangles = np.asarray(self.triangles, dtype=int)
        self._build_faces()

    # geometry -----------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @property
    def n_faces(self) -> int:
        return len(self.face_nodes)

    def cell_vertices(self) -> np.ndarray:
        return self.nodes[self.triangles]

    def areas(self) -> np.ndarray:
        v = self.cell_vertices()
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.cell_vertices().mean(axis=1)

    def face_lengths(self) -> np.ndarray:
        a = self.nodes[self.face_nodes[:, 0]]
        b = self.nodes[self.face_nodes[:, 1]]
        return np.linalg.norm(b - a, axis=1)

    def face_normals(self) -> np.ndarray:
        a = self.nodes[self.face_nodes[:, 0]]
        b = self.nodes[self.face_nodes[:, 1]]
        t = b - a
        return np.stack([t[:, 1], -t[:, 0]], axis=1) / np.linalg.norm(t, axis=1)[:, None]

    def boundary_faces(self, tag: str | None = None) -> np.ndarray:
        mask = self.face_cells[:, 1] < 0
        if tag is not None:
            mask &= self.face_tag == self.tag_names.index(tag) if tag in self.tag_names else False
        return np.flatnonzero(mask)

    def face_tag_name(self, f: int) -> str | None:
        t = self.face_tag[f]
        return None if t < 0 else self.tag_names[t]

    def cell_neighbors(self) -> np.ndarray:
        """Face-neighbour cells, shape (n_cells, 3), -1 on physical boundaries."""
        out = np.full((self.n_cells, 3), -1, dtype=int)
        for f in range(self.n_faces):
            cl, cr = self.face_cells[f]
            el, er = self.face_local[f]
            if cr >= 0:
                out[cl, el] = cr
                out[cr, er] = cl
        return out

    def node_classes(self) -> np.ndarray:
        """Node equivalence classes, merging nodes identified by periodicity."""
        parent = np.arange(len(self.nodes))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for f in range(self.n_faces):
            if np.any(self.face_shift[f] != 0.0):
                cr, er = self.face_cells[f, 1], self.face_local[f, 1]
                tri = self.triangles[cr]
                rn = (tri[er], tri[(er + 1) % 3])
                for a, b in ((self.face_nodes[f, 0], rn[1]), (self.face_nodes[f, 1], rn[0])):
                    ra, rb = find(a), find(b)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        roots = np.array([find(i) for i in range(len(parent))])
        _, cls = np.unique(roots, return_inverse=True)
        return cls

    # construction --------------------------------------------------------
    def _build_faces(self):
        tri = self.triangles
        if tri.ndim != 2 or tri.shape[1] != 3:
            raise ParseError("triangles must have three vertices")
        _check_duplicate_nodes(self.nodes)
        areas = self.areas()
        scale = max(np.ptp(self.nodes[:, 0]), np.ptp(self.nodes[:, 1]), 1e-300)
        if np.any(np.abs(areas) < 1e-14 * scale**2):
            raise DegenerateGeometry("triangle with (near) zero area")
        if np.any(areas < 0):
            raise OrientationError("clockwise triangle")
        self.triangles = _widest_angle_first(self.nodes, tri)
        tri = self.triangles
        edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for c in range(len(tri)):
            for e in range(3):
                a, b = int(tri[c, e]), int(tri[c, (e + 1) % 3])
                edges.setdefault((min(a, b), max(a, b)), []).append((c, e))
        fn, fc, fl = [], [], []
        for key, owners in edges.items():
            if len(owners) > 2:
                raise NonConforming(f"edge {key} shared by {len(owners)} triangles")
            (c, e) = owners[0]
            a, b = int(tri[c, e]), int(tri[c, (e + 1) % 3])
            if len(owners) == 2:
                c2, e2 = owners[1]
                if (tri[c2, e2], tri[c2, (e2 + 1) % 3]) != (b, a):
                    raise NonConforming("inconsistent orientation across an edge")
                fn.append((a, b))
                fc.append((c, c2))
                fl.append((e, e2))
            else:
                fn.append((a, b))
                fc.append((c, -1))
                fl.append((e, -1))
        self.face_nodes = np.array(fn, dtype=int)
        self.face_cells = np.array(fc, dtype=int)
        self.face_local = np.array(fl, dtype=int)
        self.face_shift = np.zeros((len(fn), 2))
        self.cell_faces = np.zeros((len(tri), 3), dtype=int)
        for f in range(len(fn)):
            self.cell_faces[fc[f][0], fl[f][0]] = f
            if fc[f][1] >= 0:
                self.cell_faces[fc[f][1], fl[f][1]] = f
        _check_hanging_nodes(self)
        self.face_tag = np.full(len(fn), -1, dtype=int)
        self.classify_boundary(self.boundary_classifier)

    def classify_boundary(self, classifier: Classifier | None) -> None:
        """Assign tags to boundary faces from a (midpoint, normal) rule."""
        bnd = np.flatnonzero(self.face_cells[:, 1] < 0)
        if len(bnd) == 0:
            return
        mids = 0.5 * (self.nodes[self.face_nodes[bnd, 0]] + self.nodes[self.face_nodes[bnd, 1]])
        normals = self.face_normals()[bnd]
        for f, x, n in zip(bnd, mids, normals):
            name = "boundary" if classifier is None else classifier(x, n)
            if name not in self.tag_names:
                self.tag_names.append(name)
            self.face_tag[f] = self.tag_names.index(name)

    def set_face_tags(self, tags: dict[tuple[int, int], str]) -> None:
        """Assign tags to boundary faces from explicit node pairs."""
        for f in np.flatnonzero(self.face_cells[:, 1] < 0):
            a, b = self.face_nodes[f]
            name = tags.get((min(a, b), max(a, b)))
            if name is None:
                continue
            if name not in self.tag_names:
                self.tag_names.append(name)
            self.face_tag[f] = self.tag_names.index(name)

    def make_periodic(self, tag_a: str, tag_b: str, shift: Sequence[float], tol: float = 1e-9) -> None:
        """Glue boundary faces tagged ``tag_a`` to those tagged ``tag_b``.

        ``shift`` translates a point on ``tag_a`` onto its image on ``tag_b``.
        """
        shift = np.asarray(shift, float)
        fa = self.boundary_faces(tag_a)
        fb = self.boundary_faces(tag_b)
        if len(fa) != len(fb):
            raise NonConforming(f"periodic boundaries {tag_a}/{tag_b} have different face counts")
        mid = 0.5 * (self.nodes[self.face_nodes[:, 0]] + self.nodes[self.face_nodes[:, 1]])
        remaining = list(fb)
        drop = []
        for f in fa:
            target = mid[f] + shift
            d = [np.linalg.norm(mid[g] - target) for g in remaining]
            j = int(np.argmin(d))
            if d[j] > tol * max(1.0, np.linalg.norm(shift)):
                raise NonConforming(f"no periodic partner for face {f}")
            g = remaining.pop(j)
            self.face_cells[f, 1] = self.face_cells[g, 0]
            self.face_local[f, 1] = self.face_local[g, 0]
            self.face_shift[f] = shift
            drop.append(g)
        keep = np.setdiff1d(np.arange(self.n_faces), drop)
        remap = -np.ones(self.n_faces, dtype=int)
        remap[keep] = np.arange(len(keep))
        self.face_nodes = self.face_nodes[keep]
        self.face_cells = self.face_cells[keep]
        self.face_local = self.face_local[keep]
        self.face_tag = self.face_tag[keep]
        self.face_shift = self.face_shift[keep]
        for f in range(self.n_faces):
            cl, cr = self.face_cells[f]
            self.cell_faces[cl, self.face_local[f, 0]] = f
            if cr >= 0:
                self.cell_faces[cr, self.face_local[f, 1]] = f


def _check_duplicate_nodes(nodes: np.ndarray) -> None:
    from scipy.spatial import cKDTree

    scale = max(np.ptp(nodes[:, 0]), np.ptp(nodes[:, 1]), 1.0)
    pairs = cKDTree(nodes).query_pairs(1e-12 * scale)
    if pairs:
        raise NonConforming(f"{len(pairs)} duplicated node(s)")


def _check_hanging_nodes(mesh: Mesh) -> None:
    bnd = np.flatnonzero(mesh.face_cells[:, 1] < 0)
    if len(bnd) == 0:
        return
    used = np.unique(mesh.face_nodes[bnd])
    pts = mesh.nodes[used]
    for f in bnd:
        a, b = mesh.nodes[mesh.face_nodes[f]]
        t = b - a
        ll = t @ t
        s = (pts - a) @ t / ll
        d = np.abs((pts - a) @ np.array([t[1], -t[0]])) / np.sqrt(ll)
        inside = (s > 1e-9) & (s < 1 - 1e-9) & (d < 1e-9 * np.sqrt(ll))
        if np.any(inside):
            raise NonConforming("hanging node on an edge")


def _widest_angle_first(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    v = nodes[tri]
    ang = np.zeros((len(tri), 3))
    for i in range(3):
        a = v[:, (i + 1) % 3] - v[:, i]
        b = v[:, (i + 2) % 3] - v[:, i]
        cosang = np.einsum("ij,ij->i", a, b) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        ang[:, i] = np.arccos(np.clip(cosang, -1.0, 1.0))
    best = ang.max(axis=1, keepdims=True)
    # ties resolve to the lowest local index
    first = np.argmax(ang >= best - 1e-10, axis=1)
    idx = (first[:, None] + np.arange(3)[None, :]) % 3
    return np.take_along_axis(tri, idx, axis=1)


def orient_ccw(nodes: np.ndarray, tri: np.ndarray, fix: bool = True) -> np.ndarray:
    """Return triangles in counter-clockwise order, warning when any were flipped."""
    tri = np.array(tri, dtype=int)
    v = nodes[tri]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    cw = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) < 0
    if np.any(cw):
        if not fix:
            raise OrientationError(f"{cw.sum()} clockwise triangle(s)")
        msg = f"reoriented {int(cw.sum())} clockwise triangle(s)"
        warnings.warn(msg, OrientationWarning, stacklevel=3)
        log.warning(msg)
        tri[cw] = tri[cw][:, [0, 2, 1]]
    return tri


# generators ---------------------------------------------------------------


def box_classifier(x0: float, x1: float, y0: float, y1: float) -> Classifier:
    def classify(x: np.ndarray, n: np.ndarray) -> str:
        if n[0] < -0.5:
            return "left"
        if n[0] > 0.5:
            return "right"
        if n[1] < -0.5:
            return "bottom"
        return "top"

    return classify


def generate_square_mesh(
    n: int,
    box: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0),
    periodic: bool = False,
    jitter: float = 0.0,
    seed: int | None = None,
) -> Mesh:
    """n x n squares, each split into four triangles through its centre."""
    if n < 1:
        raise ValueError("n must be positive")
    x0, x1, y0, y1 = box
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    gx, gy = np.meshgrid(np.linspace(x0, x1, n + 1), np.linspace(y0, y1, n + 1), indexing="ij")
    corners = np.stack([gx.ravel(), gy.ravel()], axis=1)
    cx, cy = np.meshgrid(x0 + hx * (np.arange(n) + 0.5), y0 + hy * (np.arange(n) + 0.5), indexing="ij")
    centres = np.stack([cx.ravel(), cy.ravel()], axis=1)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        inner = np.flatnonzero(
            (np.abs(corners[:, 0] - x0) > 1e-12) & (np.abs(corners[:, 0] - x1) > 1e-12)
            & (np.abs(corners[:, 1] - y0) > 1e-12) & (np.abs(corners[:, 1] - y1) > 1e-12)
        )
        corners[inner] += jitter * rng.uniform(-1, 1, (len(inner), 2)) * [hx, hy]
        centres += 0.5 * jitter * rng.uniform(-1, 1, centres.shape) * [hx, hy]
    nodes = np.concatenate([corners, centres])
    nc = len(corners)

    def cid(i, j):
        return i * (n + 1) + j

    tris = []
    for i in range(n):
        for j in range(n):
            bl, br, tr, tl = cid(i, j), cid(i + 1, j), cid(i + 1, j + 1), cid(i, j + 1)
            c = nc + i * n + j
            tris += [(bl, br, c), (br, tr, c), (tr, tl, c), (tl, bl, c)]
    mesh = Mesh(nodes, np.array(tris), boundary_classifier=box_classifier(*box))
    if periodic:
        mesh.make_periodic("left", "right", (x1 - x0, 0.0))
        mesh.make_periodic("bottom", "top", (0.0, y1 - y0))
    return mesh


def generate_wedge_mesh(
    r_min: float,
    r_max: float,
    theta_max: float,
    n_r: int,
    n_theta: int,
    stretch: float = 1.0,
    graded: bool = True,
) -> Mesh:
    """Triangulated circular sector.

    Arc i carries about ``n_theta * r_i / r_max`` angular intervals so cells
    stay roughly isotropic (``graded=False`` keeps ``n_theta`` on every arc,
    giving a polar grid); with ``r_min == 0`` the innermost ring is a fan
    around the origin. ``stretch`` > 1 grows the radial spacing geometrically.
    Boundary tags: ``axis0`` (theta = 0), ``axis1`` (theta = theta_max),
    ``outer`` and, when ``r_min > 0``, ``inner``.
    """
    if n_r < 1 or n_theta < 1:
        raise ValueError("n_r and n_theta must be positive")
    if stretch == 1.0:
        radii = np.linspace(r_min, r_max, n_r + 1)
    else:
        w = stretch ** np.arange(n_r)
        radii = r_min + (r_max - r_min) * np.concatenate([[0.0], np.cumsum(w) / w.sum()])
    nodes: list[tuple[float, float]] = []
    arcs: list[list[int]] = []
    angles: list[np.ndarray] = []
    for r in radii:
        if r == 0.0:
            arcs.append([len(nodes)])
            angles.append(np.array([0.0]))
            nodes.append((0.0, 0.0))
            continue
        m = max(1, int(round(n_theta * r / r_max))) if graded else n_theta
        th = np.linspace(0.0, theta_max, m + 1)
        ids = []
        for t in th:
            ids.append(len(nodes))
            nodes.append((r * np.cos(t), r * np.sin(t)))
        arcs.append(ids)
        angles.append(th)
    tris = []
    for i in range(n_r):
        inner, outer = arcs[i], arcs[i + 1]
        ti, to = angles[i], angles[i + 1]
        if len(inner) == 1:
            for j in range(len(outer) - 1):
                tris.append((inner[0], outer[j], outer[j + 1]))
            continue
        a = b = 0
        while a < len(inner) - 1 or b < len(outer) - 1:
            adv_outer = a == len(inner) - 1 or (
                b < len(outer) - 1 and 0.5 * (to[b] + to[b + 1]) <= 0.5 * (ti[a] + ti[a + 1])
            )
            if adv_outer:
                tris.append((inner[a], outer[b], outer[b + 1]))
                b += 1
            else:
                tris.append((inner[a], outer[b], inner[a + 1]))
                a += 1
    nodes_a = np.array(nodes)
    tri = _force_ccw(nodes_a, np.array(tris))
    rtol = 1e-9 * r_max

    def classify(x: np.ndarray, n: np.ndarray) -> str:
        th = np.arctan2(x[1], x[0])
        r = np.hypot(*x)
        if abs(th) < 1e-9 or (abs(x[1]) < rtol and n[1] < 0):
            return "axis0"
        if abs(th - theta_max) < 1e-9:
            return "axis1"
        if r_min > 0 and r < 0.5 * (radii[0] + radii[1]):
            return "inner"
        return "outer"

    return Mesh(nodes_a, tri, boundary_classifier=classify)


def _force_ccw(nodes: np.ndarray, tri: np.ndarray) -> np.ndarray:
    v = nodes[tri]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    cw = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) < 0
    tri = tri.copy()
    tri[cw] = tri[cw][:, [0, 2, 1]]
    return tri


def generate_step_mesh(
    nx: int = 50,
    ny: int = 20,
    jitter: float = 0.0,
    seed: int | None = None,
    nx_step: int | None = None,
) -> Mesh:
    """Forward-facing step: [0,3]x[0,1] minus [0.6,3]x[0.2,1].

    ``nx`` and ``ny`` count grid intervals over the full box. By default the
    x spacing is uniform and must put a grid line on x = 0.6; ``nx_step``
    instead fixes the number of intervals on [0, 0.6], the remaining
    ``nx - nx_step`` being spread uniformly over [0.6, 3]. ``ny`` must put a
    grid line on y = 0.2. Tags: ``inflow`` (x = 0), ``outflow`` (x = 3) and
    ``wall``.
    """
    if nx_step is None:
        xs = np.linspace(0.0, 3.0, nx + 1)
        istep = int(round(0.6 / 3.0 * nx))
    else:
        if not 0 < nx_step < nx:
            raise ValueError("nx_step must lie strictly between 0 and nx")
        xs = np.concatenate([np.linspace(0.0, 0.6, nx_step + 1), np.linspace(0.6, 3.0, nx - nx_step + 1)[1:]])
        istep = nx_step
    ys = np.linspace(0.0, 1.0, ny + 1)
    jstep = int(round(0.2 * ny))
    if abs(xs[istep] - 0.6) > 1e-12 or abs(ys[jstep] - 0.2) > 1e-12:
        raise ValueError("grid must align with the step corner")
    ids = -np.ones((nx + 1, ny + 1), dtype=int)
    nodes = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            if i > istep and j > jstep:
                continue
            ids[i, j] = len(nodes)
            nodes.append((xs[i], ys[j]))
    nodes_a = np.array(nodes)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        for i in range(1, nx):
            for j in range(1, ny):
                if ids[i, j] >= 0 and not (i >= istep and j >= jstep):
                    nodes_a[ids[i, j]] += jitter * rng.uniform(-1, 1, 2) * [min(xs[i] - xs[i - 1], xs[i + 1] - xs[i]), 1.0 / ny]
    tris = []
    for i in range(nx):
        for j in range(ny):
            if i >= istep and j >= jstep:
                continue
            bl, br, tr, tl = ids[i, j], ids[i + 1, j], ids[i + 1, j + 1], ids[i, j + 1]
            if (i + j) % 2 == 0:
                tris += [(bl, br, tr), (bl, tr, tl)]
            else:
                tris += [(bl, br, tl), (br, tr, tl)]

    def classify(x: np.ndarray, n: np.ndarray) -> str:
        if x[0] < 1e-12:
            return "inflow"
        if x[0] > 3.0 - 1e-12:
            return "outflow"
        return "wall"

    return Mesh(nodes_a, np.array(tris), boundary_classifier=classify)


# file formats ---------------------------------------------------------------


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _load_node_tri(text: str, fix_orientation: bool) -> tuple[np.ndarray, np.ndarray, dict]:
    lines = [s for s in (_strip(x) for x in text.splitlines()) if s]
    try:
        nn, nt = (int(v) for v in lines[0].split()[:2])
        nodes = np.array([[float(v) for v in lines[1 + i].split()[:2]] for i in range(nn)])
        tris = np.array([[int(v) for v in lines[1 + nn + i].split()[:3]] for i in range(nt)])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed node-tri file: {exc}") from exc
    if len(lines) > 1 + nn + nt:
        raise ParseError("trailing content after triangle block")
    if tris.size and tris.min() == 1 and tris.max() == nn:
        tris = tris - 1
    if tris.size and (tris.min() < 0 or tris.max() >= nn):
        raise ParseError("triangle references a missing node")
    return nodes, orient_ccw(nodes, tris, fix_orientation), {}


def _load_msh(text: str, fix_orientation: bool) -> tuple[np.ndarray, np.ndarray, dict]:
    lines = [x.strip() for x in text.splitlines()]
    try:
        names: dict[int, str] = {}
        if "$PhysicalNames" in lines:
            i = lines.index("$PhysicalNames")
            for q in range(int(lines[i + 1])):
                parts = lines[i + 2 + q].split(maxsplit=2)
                names[int(parts[1])] = parts[2].strip('"')
        i = lines.index("$Nodes")
        nn = int(lines[i + 1])
        node_ids = {}
        nodes = np.zeros((nn, 2))
        for q in range(nn):
            parts = lines[i + 2 + q].split()
            node_ids[int(parts[0])] = q
            nodes[q] = float(parts[1]), float(parts[2])
        i = lines.index("$Elements")
        ne = int(lines[i + 1])
        tris, tags = [], {}
        for q in range(ne):
            parts = [int(v) for v in lines[i + 2 + q].split()]
            etype, ntags = parts[1], parts[2]
            phys = parts[3] if ntags > 0 else 0
            conn = [node_ids[v] for v in parts[3 + ntags:]]
            if etype == 2:
                tris.append(conn[:3])
            elif etype == 1:
                a, b = conn[:2]
                tags[(min(a, b), max(a, b))] = names.get(phys, f"tag{phys}")
    except (ValueError, IndexError, KeyError) as exc:
        raise ParseError(f"malformed MSH file: {exc}") from exc
    if not tris:
        raise ParseError("MSH file has no triangle elements")
    return nodes, orient_ccw(nodes, np.array(tris), fix_orientation), tags


def load_mesh(
    path: str | Path,
    classifier: Classifier | None = None,
    fix_orientation: bool = True,
) -> Mesh:
    """Load a node-tri ASCII file or a Gmsh 2.2 ASCII file (triangles only)."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("$MeshFormat") or path.suffix == ".msh":
        nodes, tris, tags = _load_msh(text, fix_orientation)
    else:
        nodes, tris, tags = _load_node_tri(text, fix_orientation)
    mesh = Mesh(nodes, tris, boundary_classifier=classifier)
    if tags and classifier is None:
        mesh.face_tag[:] = -1
        mesh.tag_names.clear()
        mesh.set_face_tags(tags)
        missing = (mesh.face_cells[:, 1] < 0) & (mesh.face_tag < 0)
        if np.any(missing):
            if "boundary" not in mesh.tag_names:
                mesh.tag_names.append("boundary")
            mesh.face_tag[missing] = mesh.tag_names.index("boundary")
    return mesh


def write_msh(mesh: Mesh, path: str | Path) -> None:
    """Write a Gmsh 2.2 ASCII file with boundary lines carrying physical tags."""
    names = list(mesh.tag_names)
    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat", "$PhysicalNames", str(len(names) + 1)]
    for i, name in enumerate(names):
        out.append(f'1 {i + 1} "{name}"')
    out.append(f'2 {len(names) + 1} "domain"')
    out += ["$EndPhysicalNames", "$Nodes", str(len(mesh.nodes))]
    out += [f"{i + 1} {x:.17g} {y:.17g} 0" for i, (x, y) in enumerate(mesh.nodes)]
    out.append("$EndNodes")
    bnd = mesh.boundary_faces()
    elems = []
    for f in bnd:
        a, b = mesh.face_nodes[f] + 1
        t = mesh.face_tag[f] + 1
        elems.append(f"1 2 {t} {t} {a} {b}")
    for tri in mesh.triangles + 1:
        elems.append(f"2 2 {len(names) + 1} {len(names) + 1} {tri[0]} {tri[1]} {tri[2]}")
    out += ["$Elements", str(len(elems))]
    out += [f"{i + 1} {e}" for i, e in enumerate(elems)]
    out.append("$EndElements")
    Path(path).write_text("\n".join(out) + "\n")
