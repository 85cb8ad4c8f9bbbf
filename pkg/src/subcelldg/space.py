"""Mesh-wide discrete space: cell maps, face tables and subcell connectivity.

Global subcell index is ``cell * n_sub + m``. Global subcell faces come in
two groups: faces inside a cell (``cell * n_if + f``) followed by the pieces
of primal faces (``n_cells * n_if + face * n_edge_sub + j``). Every global
face has a left subcell, a right subcell (-1 on a physical boundary), a
length and a unit normal pointing from left to right.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import NonMatchingSubfaces
from .mesh import Mesh
from .operators import CellOperators, build_operators
from .physics import BoundarySpec
from .subdivision import SubdivisionScheme, build_subdivision, edge_point


def _edge_params(points: np.ndarray, tol: float = 1e-12) -> list[dict[int, float]]:
    out = []
    for x, y in points:
        d = {}
        if abs(y) < tol:
            d[0] = x
        if abs(x + y - 1.0) < tol:
            d[1] = y
        if abs(x) < tol:
            d[2] = 1.0 - y
        out.append(d)
    return out


class Space:
    def __init__(
        self,
        mesh: Mesh,
        ops: CellOperators,
        boundary: dict[str, BoundarySpec] | None = None,
    ):
        self.mesh = mesh
        self.ops = ops
        self.topo = ops.topo
        self.k = ops.k
        self.n_sub = ops.topo.n_subcells
        self.n_cells = mesh.n_cells
        self.n_subcells = self.n_cells * self.n_sub
        self.boundary = dict(boundary or {})
        self._cells()
        self._faces()
        self._subcell_faces()
        self._subnodes()

    # ------------------------------------------------------------------
    def _cells(self):
        v = self.mesh.cell_vertices()
        self.v0 = v[:, 0]
        jac = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
        self.jac = jac
        self.det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        self.jac_inv = np.linalg.inv(jac)
        self.area = 0.5 * self.det
        self.centroid = v.mean(axis=1)
        self.vol_x = self.to_physical(self.ops.vol_pts)
        self.sub_area = (self.area[:, None] * self.ops.frac[None, :]).ravel()
        self.sub_centroid = self.to_physical(self.topo.centroids).reshape(-1, 2)
        perim = np.linalg.norm(np.roll(v, -1, axis=1) - v, axis=2).sum(axis=1)
        self.cell_length = self.area / perim
        sub_perim = np.zeros((self.n_cells, self.n_sub))
        for m, poly in enumerate(self.topo.polygons):
            pts = self.to_physical(self.topo.points[poly])
            sub_perim[:, m] = np.linalg.norm(np.roll(pts, -1, axis=1) - pts, axis=2).sum(axis=1)
        self.sub_length = self.sub_area / sub_perim.ravel()

    def to_physical(self, ref: np.ndarray) -> np.ndarray:
        """Map reference points (..., 2) into every cell: (n_cells, ..., 2)."""
        ref = np.asarray(ref, float)
        flat = self.v0[:, None, :] + np.einsum("cij,pj->cpi", self.jac, ref.reshape(-1, 2))
        return flat.reshape((self.n_cells,) + ref.shape)

    def _faces(self):
        mesh, ops = self.mesh, self.ops
        t = ops.edge_t
        if np.abs(t - (1.0 - t[::-1])).max() > 1e-13:
            raise NonMatchingSubfaces("edge quadrature is not symmetric")
        self.face_left = mesh.face_cells[:, 0]
        self.face_right = mesh.face_cells[:, 1]
        self.face_eleft = mesh.face_local[:, 0]
        self.face_eright = mesh.face_local[:, 1]
        a = mesh.nodes[mesh.face_nodes[:, 0]]
        b = mesh.nodes[mesh.face_nodes[:, 1]]
        self.face_len = np.linalg.norm(b - a, axis=1)
        self.face_normal = mesh.face_normals()
        self.face_x = a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]
        interior = self.face_right >= 0
        self.interior_faces = np.flatnonzero(interior)
        self.boundary_faces = np.flatnonzero(~interior)
        # neighbour points must coincide with the reversed edge points
        fi = self.interior_faces
        if len(fi):
            ref_r = edge_point(0, t)  # any edge; map via the right cell's local edge
            xr = np.empty((len(fi), len(t), 2))
            for e in range(3):
                sel = self.face_eright[fi] == e
                if np.any(sel):
                    cells = self.face_right[fi[sel]]
                    pr = edge_point(e, t)
                    xr[sel] = self.v0[cells][:, None, :] + np.einsum("cij,pj->cpi", self.jac[cells], pr)
            xr = xr[:, ::-1] - mesh.face_shift[fi][:, None, :]
            err = np.abs(xr - self.face_x[fi]).max() if len(fi) else 0.0
            if err > 1e-9 * max(1.0, np.abs(mesh.nodes).max()):
                raise NonMatchingSubfaces(f"neighbouring subfaces mismatch by {err:.3e}")
            del ref_r
        # cell-wise edge length table
        self.cell_edge_len = self.face_len[mesh.cell_faces]
        # group boundary faces by spec
        self.boundary_groups: list[tuple[BoundarySpec, np.ndarray]] = []
        tags = mesh.face_tag[self.boundary_faces]
        for tid in np.unique(tags):
            name = mesh.tag_names[tid] if tid >= 0 else "boundary"
            spec = self.boundary.get(name, self.boundary.get("default"))
            if spec is None:
                raise KeyError(f"no boundary condition for tag {name!r}")
            self.boundary_groups.append((spec, self.boundary_faces[tags == tid]))

    def _subcell_faces(self):
        topo, ops = self.topo, self.ops
        nc, ns = self.n_cells, self.n_sub
        nif = topo.n_interior_faces
        seg = topo.face_segments()  # (nif, 2, 2)
        if nif:
            pa = self.to_physical(seg[:, 0])
            pb = self.to_physical(seg[:, 1])
            tang = pb - pa
            ln = np.linalg.norm(tang, axis=2)
            nrm = np.stack([tang[..., 1], -tang[..., 0]], axis=2) / ln[..., None]
            base = (np.arange(nc) * ns)[:, None]
            gl_i = (base + topo.interior_faces[None, :, 0]).ravel()
            gr_i = (base + topo.interior_faces[None, :, 1]).ravel()
            len_i = ln.ravel()
            nrm_i = nrm.reshape(-1, 2)
            mid_i = (0.5 * (pa + pb)).reshape(-1, 2)
        else:
            gl_i = gr_i = np.zeros(0, dtype=int)
            len_i = np.zeros(0)
            nrm_i = mid_i = np.zeros((0, 2))
        self.n_if = nif
        nsub = len(topo.boundary_subfaces[0])
        self.n_edge_sub = nsub
        owner = np.array([[s[0] for s in topo.boundary_subfaces[e]] for e in range(3)])
        breaks = topo.edge_breaks()
        nf = self.mesh.n_faces
        j = np.arange(nsub)
        gl_b = (self.face_left[:, None] * ns + owner[self.face_eleft][:, j]).ravel()
        right_owner = owner[np.maximum(self.face_eright, 0)][:, nsub - 1 - j]
        gr_b = np.where(self.face_right[:, None] >= 0, self.face_right[:, None] * ns + right_owner, -1).ravel()
        len_b = (self.face_len[:, None] * np.diff(breaks)[None, :]).ravel()
        nrm_b = np.repeat(self.face_normal, nsub, axis=0)
        a = self.mesh.nodes[self.mesh.face_nodes[:, 0]]
        b = self.mesh.nodes[self.mesh.face_nodes[:, 1]]
        tm = 0.5 * (breaks[:-1] + breaks[1:])
        mid_b = (a[:, None, :] + tm[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
        self.g_left = np.concatenate([gl_i, gl_b])
        self.g_right = np.concatenate([gr_i, gr_b])
        self.g_len = np.concatenate([len_i, len_b])
        self.g_normal = np.concatenate([nrm_i, nrm_b])
        self.g_mid = np.concatenate([mid_i, mid_b])
        self.n_gfaces = len(self.g_left)
        self.g_offset = len(gl_i)
        self.g_face = np.repeat(np.arange(nf), nsub)  # primal face of each edge piece
        self.edge_owner = owner
        # physical boundary pieces grouped by spec
        self.g_boundary_groups = []
        for spec, faces in self.boundary_groups:
            idx = (self.g_offset + faces[:, None] * nsub + j[None, :]).ravel()
            self.g_boundary_groups.append((spec, idx))
        rows = np.concatenate([self.g_left, self.g_right[self.g_right >= 0]])
        cols = np.concatenate([np.arange(self.n_gfaces), np.flatnonzero(self.g_right >= 0)])
        vals = np.concatenate([np.ones(self.n_gfaces), -np.ones(int((self.g_right >= 0).sum()))])
        self.divergence = sp.csr_matrix((vals, (rows, cols)), shape=(self.n_subcells, self.n_gfaces))
        inner = self.g_right >= 0
        adj = sp.coo_matrix(
            (np.ones(int(inner.sum())), (self.g_left[inner], self.g_right[inner])),
            shape=(self.n_subcells, self.n_subcells),
        )
        self.face_adjacency = ((adj + adj.T) > 0).astype(np.int8).tocsr()
        self.g_incidence = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n_subcells, self.n_gfaces)
        )

    def _subnodes(self):
        topo, mesh = self.topo, self.mesh
        npt = len(topo.points)
        phys = self.to_physical(topo.points).reshape(-1, 2)
        n = len(phys)
        parent = np.arange(n)

        def find(i):
            root = i
            while parent[root] != root:
                root = parent[root]
            while parent[i] != root:
                parent[i], i = root, parent[i]
            return root

        def union(i, j):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        scale = max(np.abs(mesh.nodes).max(), 1.0)
        for i, j in cKDTree(phys).query_pairs(1e-10 * scale):
            union(i, j)
        params = _edge_params(topo.points)
        on_edge = [[(q, d[e]) for q, d in enumerate(params) if e in d] for e in range(3)]
        for f in np.flatnonzero(np.any(mesh.face_shift != 0.0, axis=1)):
            cl, cr = mesh.face_cells[f]
            el, er = mesh.face_local[f]
            right = {round(1.0 - t, 12): q for q, t in on_edge[er]}
            for q, t in on_edge[el]:
                q2 = right.get(round(t, 12))
                if q2 is None:
                    raise NonMatchingSubfaces("periodic subcell vertices do not match")
                union(cl * npt + q, cr * npt + q2)
        roots = np.array([find(i) for i in range(n)])
        _, node_id = np.unique(roots, return_inverse=True)
        self.n_subnodes = int(node_id.max()) + 1
        node_id = node_id.reshape(self.n_cells, npt)
        maxv = max(len(p) for p in topo.polygons)
        local = np.array([np.pad(p, (0, maxv - len(p)), mode="edge") for p in topo.polygons])
        self.sub_vertex_ref = topo.points[local]  # (n_sub, maxv, 2)
        self.sub_nodes = node_id[:, local].reshape(self.n_subcells, maxv)
        rows = np.repeat(np.arange(self.n_subcells), maxv)
        inc = sp.csr_matrix(
            (np.ones(len(rows)), (rows, self.sub_nodes.ravel())), shape=(self.n_subcells, self.n_subnodes)
        )
        inc.data[:] = 1.0
        self.node_incidence = inc
        self.node_adjacency = ((inc @ inc.T) > 0).astype(np.int8).tocsr()
        nb = mesh.cell_neighbors()
        self.cell_stencil = np.where(nb >= 0, nb, np.arange(self.n_cells)[:, None])
        self.cell_node_class = mesh.node_classes()[mesh.triangles]


def build_space(
    mesh: Mesh,
    k: int,
    scheme: SubdivisionScheme | str = SubdivisionScheme.STRUCTURED_UNIFORM,
    boundary: dict[str, BoundarySpec] | None = None,
) -> Space:
    return Space(mesh, build_operators(build_subdivision(scheme, k)), boundary)
