"""A posteriori detection and subcell flux correction.

After each forward Euler stage, candidate subcell means are checked for
physical admissibility (PAD) and for a relaxed discrete maximum principle
(NAD). Faces around troubled subcells receive a first-order Lax-Friedrichs
flux, possibly blended with the reconstructed high-order flux, and only the
subcells touching modified faces are recomputed. Detection repeats until no
new subcell is flagged.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .dg import DGSolver
from .errors import CorrectionDiverged
from .physics import lax_friedrichs
from .subcell_fv import global_face_fluxes, reconstructed_fluxes

CorrectionMode = Literal["none", "original", "blended"]
NeighbourSet = Literal["subcell", "cell"]

BLEND_WEIGHTS = (1.0, 0.75, 0.5, 0.25)


class _Reducer:
    """Min/max of per-subcell values over groups given by an index table."""

    def __init__(self, table: np.ndarray, n_groups: int):
        flat = table.ravel()
        self.order = np.argsort(flat, kind="stable")
        self.owner = np.repeat(np.arange(table.shape[0]), table.shape[1])[self.order]
        keys = flat[self.order]
        self.starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
        self.keys = keys[self.starts]
        self.n_groups = n_groups
        self.table = table

    def group_min(self, v: np.ndarray) -> np.ndarray:
        out = np.full(self.n_groups, np.inf)
        out[self.keys] = np.minimum.reduceat(v[self.owner], self.starts)
        return out

    def group_max(self, v: np.ndarray) -> np.ndarray:
        out = np.full(self.n_groups, -np.inf)
        out[self.keys] = np.maximum.reduceat(v[self.owner], self.starts)
        return out


@dataclass
class DetectionConfig:
    pad: bool = True
    nad: bool = True
    neighbours: NeighbourSet = "subcell"
    relax: bool = True
    relax_level: Literal["subcell", "cell"] = "subcell"
    bounds: Optional[tuple[float, float]] = None
    pad_tol: float = 1e-14
    nad_abs: float = 1e-4
    nad_rel: float = 1e-3


class Detector:
    def __init__(self, solver: DGSolver, config: DetectionConfig | None = None):
        self.solver = solver
        self.space = solver.space
        self.cfg = config or DetectionConfig()
        sp = self.space
        self._nodes = _Reducer(sp.sub_nodes, sp.n_subnodes)
        # physical subcell vertices for the smooth-extrema test
        self._vertices = sp.to_physical(sp.sub_vertex_ref).reshape(sp.n_subcells, -1, 2)
        cls = sp.cell_node_class
        self._cell_nodes = _Reducer(cls, int(cls.max()) + 1)
        self._cell_vertices = sp.mesh.cell_vertices()
        self._dx = self._vertices - sp.sub_centroid[:, None, :]
        ops = sp.ops
        self._grad_table = ops.mean_grad.transpose(1, 0, 2).reshape(ops.n, -1)
        self._hess_table = ops.mean_hess.transpose(1, 0, 2).reshape(ops.n, -1)

    # bounds -----------------------------------------------------------------
    def nad_bounds(self, ubar_old: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sp = self.space
        v = ubar_old[:, self.solver.model.nad_index]
        if self.cfg.neighbours == "subcell":
            lo = self._nodes.group_min(v)[sp.sub_nodes].min(axis=1)
            hi = self._nodes.group_max(v)[sp.sub_nodes].max(axis=1)
        else:
            vc = v.reshape(sp.n_cells, sp.n_sub)
            cmin, cmax = vc.min(axis=1), vc.max(axis=1)
            lo = np.repeat(cmin[sp.cell_stencil].min(axis=1).clip(max=cmin), sp.n_sub)
            hi = np.repeat(cmax[sp.cell_stencil].max(axis=1).clip(min=cmax), sp.n_sub)
        delta = np.maximum(self.cfg.nad_abs, self.cfg.nad_rel * (hi - lo))
        return lo - delta, hi + delta

    # tests ------------------------------------------------------------------
    def pad_violations(self, ubar: np.ndarray) -> np.ndarray:
        return ~self.solver.model.admissible(ubar, self.cfg.bounds, self.cfg.pad_tol)

    def smooth_extrema(self, moments: np.ndarray) -> np.ndarray:
        """True where the linearised derivative fields respect vertex bounds."""
        sp = self.space
        if sp.k < 2:
            return np.zeros(sp.n_subcells, dtype=bool)
        if self.cfg.relax_level == "cell":
            return np.repeat(self._smooth_cell(moments), sp.n_sub)
        ops = sp.ops
        u = moments[..., self.solver.model.nad_index]
        n = ops.n
        gref = (u @ self._grad_table).reshape(sp.n_cells, n, 2)
        href = (u @ self._hess_table).reshape(sp.n_cells, n, 3)
        g, h = _to_physical_derivatives(sp.jac_inv, gref, href)
        g = g.reshape(-1, 2)
        h = h.reshape(-1, 2, 2)
        dx = self._dx
        vals = g[:, None, :] + (h[:, None, :, 0] * dx[..., 0:1] + h[:, None, :, 1] * dx[..., 1:2])
        ok = np.ones(sp.n_subcells, dtype=bool)
        for a in range(2):
            lo = self._nodes.group_min(g[:, a])[sp.sub_nodes]
            hi = self._nodes.group_max(g[:, a])[sp.sub_nodes]
            tol = 1e-12 * (np.abs(lo) + np.abs(hi)) + 1e-14
            ok &= np.all((vals[..., a] >= lo - tol) & (vals[..., a] <= hi + tol), axis=1)
        return ok

    def _smooth_cell(self, moments: np.ndarray) -> np.ndarray:
        sp = self.space
        ops = sp.ops
        u = moments[..., self.solver.model.nad_index]
        w = ops.frac / ops.frac.sum()
        gref = np.einsum("m,mnd,cn->cd", w, ops.mean_grad, u)[:, None]
        href = np.einsum("m,mnh,cn->ch", w, ops.mean_hess, u)[:, None]
        g, h = _to_physical_derivatives(sp.jac_inv, gref, href)
        g, h = g[:, 0], h[:, 0]
        dx = self._cell_vertices - sp.centroid[:, None, :]
        vals = g[:, None, :] + np.einsum("cab,cvb->cva", h, dx)
        ok = np.ones(sp.n_cells, dtype=bool)
        cls = sp.cell_node_class
        for a in range(2):
            lo = self._cell_nodes.group_min(g[:, a])[cls]
            hi = self._cell_nodes.group_max(g[:, a])[cls]
            tol = 1e-12 * (np.abs(lo) + np.abs(hi)) + 1e-14
            ok &= np.all((vals[..., a] >= lo - tol) & (vals[..., a] <= hi + tol), axis=1)
        return ok

    def detect(self, ubar_new: np.ndarray, moments_new: np.ndarray, bounds: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
        bad = np.zeros(len(ubar_new), dtype=bool)
        if self.cfg.pad:
            bad |= self.pad_violations(ubar_new)
        if self.cfg.nad:
            v = ubar_new[:, self.solver.model.nad_index]
            lo, hi = bounds
            with np.errstate(invalid="ignore"):
                nad = (v < lo) | (v > hi)
            if self.cfg.relax and np.any(nad):
                with np.errstate(all="ignore"):
                    nad &= ~self.smooth_extrema(moments_new)
            bad |= nad
        return bad


def _to_physical_derivatives(jac_inv, gref, href):
    # d/dx_a = sum_d Jinv[d, a] d/dxi_d
    g = np.matmul(gref, jac_inv)
    hm = np.stack(
        [np.stack([href[..., 0], href[..., 1]], -1), np.stack([href[..., 1], href[..., 2]], -1)], -2
    )
    jt = np.swapaxes(jac_inv, 1, 2)[:, None]
    h = jt @ hm @ jac_inv[:, None]
    return g, h


@dataclass
class StageStats:
    troubled: int = 0
    recomputed: int = 0
    iterations: int = 0
    forced: bool = False


@dataclass
class CorrectionLog:
    stages: list[StageStats] = field(default_factory=list)

    def corrected_fractions(self, n_subcells: int) -> np.ndarray:
        return np.array([s.recomputed for s in self.stages]) / n_subcells

    def mean_iterations(self) -> float:
        it = [s.iterations for s in self.stages if s.iterations > 0]
        return float(np.mean(it)) if it else 0.0

    @property
    def total_recomputed(self) -> int:
        return int(sum(s.recomputed for s in self.stages))


class Corrector:
    """Forward Euler stage with a posteriori subcell correction."""

    def __init__(
        self,
        solver: DGSolver,
        detector: Detector | None = None,
        mode: CorrectionMode = "blended",
        max_iter: int = 10,
    ):
        self.solver = solver
        self.space = solver.space
        self.detector = detector or Detector(solver)
        self.mode = mode
        self.max_iter = max_iter
        self.log = CorrectionLog()
        self.inject: Optional[np.ndarray] = None
        # face blending weights of the most recent stages (None when nothing was corrected)
        self.recent_theta: deque = deque(maxlen=3)
        # subcell means produced by the latest stage, before conversion to moments
        self.last_submeans: Optional[np.ndarray] = None

    # face weights ---------------------------------------------------------------
    def _faces_of(self, sub: np.ndarray) -> np.ndarray:
        sp = self.space
        right = sp.g_right
        return sub[sp.g_left] | np.where(right >= 0, sub[np.maximum(right, 0)], False)

    def theta_map(self, troubled: np.ndarray, mode: CorrectionMode | None = None) -> np.ndarray:
        """Blending weight per global face (1 means pure first-order flux)."""
        mode = mode or self.mode
        sp = self.space
        theta = np.where(self._faces_of(troubled), 1.0, 0.0)
        if mode == "original":
            return theta
        t = troubled.astype(np.int8)
        ring1 = (sp.face_adjacency @ t) > 0
        ring2 = (sp.node_adjacency @ t) > 0
        ring3 = ((sp.face_adjacency @ ring2.astype(np.int8)) > 0) | ring2
        for w, ring in zip(BLEND_WEIGHTS[1:], (ring1, ring2, ring3)):
            theta = np.maximum(theta, np.where(self._faces_of(ring), w, 0.0))
        return theta

    def first_order_fluxes(self, ubar: np.ndarray, gamma: float, faces: np.ndarray) -> np.ndarray:
        sp, model = self.space, self.solver.model
        left = sp.g_left[faces]
        right = sp.g_right[faces]
        ul = ubar[left]
        ur = ubar[np.maximum(right, 0)].copy()
        if np.any(right < 0):
            for spec, idx in sp.g_boundary_groups:
                sel = np.isin(faces, idx)
                if np.any(sel):
                    ur[sel] = model.ghost(ul[sel], spec, sp.g_normal[faces[sel]])
        f = lax_friedrichs(model, ul, ur, sp.g_normal[faces], gamma, sp.g_mid[faces])
        return sp.g_len[faces, None] * f

    # stage ------------------------------------------------------------------------
    def euler_step(self, moments: np.ndarray, dt: float) -> np.ndarray:
        return self.step(moments, dt)[0]

    def step(self, moments: np.ndarray, dt: float):
        """One corrected forward Euler stage; returns (moments, stats, theta)."""
        solver, sp = self.solver, self.space
        ubar0 = solver.submeans(moments)
        gamma = solver.global_speed(ubar0)
        res = solver.residual(moments, gamma)
        cand = moments + dt * res.phi / sp.det[:, None, None]
        stats = StageStats()
        if self.mode == "none":
            self.log.stages.append(stats)
            self.recent_theta.append(None)
            self.last_submeans = None
            return cand, stats, None
        ubar1 = solver.submeans(cand)
        self.last_submeans = ubar1
        bounds = self.detector.nad_bounds(ubar0)
        troubled = self.detector.detect(ubar1, cand, bounds)
        if self.inject is not None:
            troubled = troubled | self.inject
        if not np.any(troubled):
            self.log.stages.append(stats)
            self.recent_theta.append(None)
            return cand, stats, None

        fhat = global_face_fluxes(solver, reconstructed_fluxes(solver, res), res)
        flo = self.first_order_fluxes(ubar0, gamma, np.arange(sp.n_gfaces))
        mask = troubled.copy()
        theta = None
        out = cand
        for it in range(1, self.max_iter + 2):
            forced = it == self.max_iter + 1
            previous = theta
            theta = self.theta_map(mask, "original" if forced else self.mode)
            if forced and previous is not None:
                theta = np.maximum(theta, previous)
            out, ubar = self._recompute(cand, ubar0, ubar1, fhat, flo, theta, dt)
            self.last_submeans = ubar
            stats.iterations = it
            new = self.detector.detect(ubar, out, bounds)
            if forced:
                stats.forced = True
                if np.any(self.detector.pad_violations(ubar)):
                    raise CorrectionDiverged("admissibility still violated after forced first-order pass")
                break
            grown = mask | new
            if np.array_equal(grown, mask):
                break
            mask = grown
        stats.troubled = int(mask.sum())
        stats.recomputed = int(self._touched(theta).sum())
        self.log.stages.append(stats)
        self.recent_theta.append(theta)
        return out, stats, theta

    def subcell_theta(self, theta: np.ndarray | None) -> np.ndarray:
        """Largest blending weight on the faces of each subcell."""
        sp = self.space
        out = np.zeros(sp.n_subcells)
        if theta is None:
            return out
        np.maximum.at(out, sp.g_left, theta)
        r = sp.g_right
        np.maximum.at(out, r[r >= 0], theta[r >= 0])
        return out

    def _touched(self, theta: np.ndarray) -> np.ndarray:
        sp = self.space
        active = np.flatnonzero(theta > 0)
        sub = np.zeros(sp.n_subcells, dtype=bool)
        sub[sp.g_left[active]] = True
        r = sp.g_right[active]
        sub[r[r >= 0]] = True
        return sub

    def _recompute(self, cand, ubar0, ubar1, fhat, flo, theta, dt):
        sp = self.space
        active = theta > 0
        th = theta[:, None]
        with np.errstate(invalid="ignore"):
            ftil = np.where(th >= 1.0, flo, np.where(active[:, None], th * flo + (1.0 - th) * fhat, fhat))
        rows = np.flatnonzero(self._touched(theta))
        div = sp.divergence[rows] @ ftil
        ubar = ubar1.copy()
        ubar[rows] = ubar0[rows] - dt * div / sp.sub_area[rows, None]
        cells = np.unique(rows // sp.n_sub)
        out = cand.copy()
        ub = ubar.reshape(sp.n_cells, sp.n_sub, -1)
        out[cells] = np.einsum("mn,cnv->cmv", sp.ops.proj_inv, ub[cells])
        return out, ubar
