"""Modal discontinuous Galerkin residual on triangles.

Moments are stored as an array of shape (n_cells, N_k, n_vars). The basis is
orthonormal on the reference triangle, so the physical mass matrix of cell c
is ``det(J_c) * I``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .physics import Model, lax_friedrichs
from .space import Space

VolumeFlux = Literal["exact", "projected"]


@dataclass
class SolutionState:
    t: float
    moments: np.ndarray

    def copy(self) -> "SolutionState":
        return SolutionState(self.t, self.moments.copy())


@dataclass
class Residual:
    """DG residual of one state together with the pieces the subcell view needs."""

    phi: np.ndarray          # (n_cells, N, nv)
    boundary: np.ndarray     # (n_cells, N, nv): flux through subcell parts of the cell boundary
    face_flux: np.ndarray    # (n_faces, n_pts, nv) numerical flux at primal face points
    edge_pieces: np.ndarray  # (n_faces, n_edge_sub, nv) integrated over each piece
    gamma: float


class DGSolver:
    def __init__(self, space: Space, model: Model, volume_flux: VolumeFlux = "exact"):
        self.space = space
        self.model = model
        self.volume_flux = volume_flux
        ops = space.ops
        self._vol_hi = ops.basis_hi.eval(ops.vol_pts)
        # flattened tables for matrix-product evaluation
        nq = len(ops.vol_w)
        self._wdphi = (ops.vol_w[:, None, None] * ops.vol_dphi).transpose(0, 2, 1).reshape(nq * 2, ops.n)
        npt = len(ops.edge_t)
        self._edge_phi = ops.edge_phi.reshape(3 * npt, ops.n)
        self._edge_test = (ops.edge_phi * ops.edge_w[None, :, None]).reshape(3 * npt, ops.n)
        self._edge_owner = (ops.edge_onehot * ops.edge_w[None, :, None]).reshape(3 * npt, ops.n)
        self._static_speed = 0.0
        if model.space_dependent:
            dummy = np.zeros((len(space.mesh.nodes), model.n_vars))
            self._static_speed = float(np.max(model.wavespeed(dummy, space.mesh.nodes)))

    # conversions -------------------------------------------------------
    def submeans(self, moments: np.ndarray) -> np.ndarray:
        """Subcell means, shape (n_subcells, nv)."""
        ub = np.matmul(self.space.ops.proj, moments)
        return ub.reshape(-1, moments.shape[-1])

    def moments_from_submeans(self, ubar: np.ndarray) -> np.ndarray:
        sp = self.space
        ub = ubar.reshape(sp.n_cells, sp.n_sub, -1)
        return np.matmul(sp.ops.proj_inv, ub)

    def project(self, u0: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Initial moments reproducing the exact subcell means of ``u0`` (up to quadrature)."""
        return self.moments_from_submeans(self.exact_submeans(u0))

    def exact_submeans(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        sp, ops = self.space, self.space.ops
        x = sp.to_physical(ops.sub_pts)
        vals = np.asarray(fn(x), float)
        if vals.ndim == 2:
            vals = vals[..., None]
        acc = np.zeros((sp.n_cells, sp.n_sub, vals.shape[-1]))
        for m in range(sp.n_sub):
            sel = ops.sub_owner == m
            acc[:, m] = np.einsum("q,cqv->cv", ops.sub_w[sel], vals[:, sel]) / ops.sub_w[sel].sum()
        return acc.reshape(-1, vals.shape[-1])

    def evaluate(self, moments: np.ndarray, ref_pts: np.ndarray) -> np.ndarray:
        phi = self.space.ops.basis.eval(ref_pts)
        return np.einsum("qm,cmv->cqv", phi, moments)

    # speeds and time step ------------------------------------------------
    def global_speed(self, ubar: np.ndarray) -> float:
        s = self.model.wavespeed(ubar, self.space.sub_centroid)
        return float(max(np.max(s), self._static_speed))

    def cfl_timestep(self, moments: np.ndarray, safety: float = 0.95) -> float:
        sp = self.space
        gamma = self.global_speed(self.submeans(moments))
        dc = sp.cell_length / (2 * sp.k + 1)
        dm = sp.sub_length.reshape(sp.n_cells, sp.n_sub).min(axis=1)
        return safety * float(np.min(np.minimum(dc, dm))) / max(gamma, 1e-300)

    # residual --------------------------------------------------------------
    def traces(self, moments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Left and right states at primal face points (right reversed to match)."""
        sp = self.space
        npt = len(sp.ops.edge_t)
        tr = np.matmul(self._edge_phi, moments).reshape(sp.n_cells, 3, npt, -1)
        ul = tr[sp.face_left, sp.face_eleft]
        ur = np.empty_like(ul)
        fi = sp.interior_faces
        ur[fi] = tr[sp.face_right[fi], sp.face_eright[fi]][:, ::-1]
        for spec, faces in sp.boundary_groups:
            n = np.broadcast_to(sp.face_normal[faces][:, None, :], ul[faces].shape[:-1] + (2,))
            ur[faces] = self.model.ghost(ul[faces], spec, n)
        return ul, ur

    def volume_flux_values(self, moments: np.ndarray) -> np.ndarray:
        sp, ops = self.space, self.space.ops
        uq = np.matmul(ops.vol_phi, moments)
        with np.errstate(all="ignore"):
            f = self.model.flux(uq, sp.vol_x)
        if self.volume_flux == "projected":
            f = self.project_flux_values(f)
        return f

    def project_flux_values(self, f: np.ndarray) -> np.ndarray:
        """L2 projection of sampled fluxes onto P^{k+1}, re-sampled at volume points."""
        ops = self.space.ops
        coef = np.einsum("q,qj,cqvd->cjvd", ops.vol_w, self._vol_hi, f)
        return np.einsum("qj,cjvd->cqvd", self._vol_hi, coef)

    def residual(self, moments: np.ndarray, gamma: float | None = None) -> Residual:
        sp, ops = self.space, self.space.ops
        if gamma is None:
            gamma = self.global_speed(self.submeans(moments))
        f = self.volume_flux_values(moments)
        nc, nq, nv = f.shape[:3]
        ji = sp.jac_inv[:, None, None]
        fref = np.stack(
            [ji[..., 0, 0] * f[..., 0] + ji[..., 0, 1] * f[..., 1],
             ji[..., 1, 0] * f[..., 0] + ji[..., 1, 1] * f[..., 1]], axis=-1
        )
        fref = fref.transpose(0, 2, 1, 3).reshape(nc, nv, nq * 2)
        phi = sp.det[:, None, None] * np.matmul(fref, self._wdphi).transpose(0, 2, 1)

        ul, ur = self.traces(moments)
        n = np.broadcast_to(sp.face_normal[:, None, :], ul.shape[:-1] + (2,))
        with np.errstate(all="ignore"):
            fn = lax_friedrichs(self.model, ul, ur, n, gamma, sp.face_x)
        out = np.empty((sp.n_cells, 3) + fn.shape[1:])
        out[sp.face_left, sp.face_eleft] = fn
        fi = sp.interior_faces
        out[sp.face_right[fi], sp.face_eright[fi]] = -fn[fi][:, ::-1]
        weighted = (out * sp.cell_edge_len[:, :, None, None]).reshape(nc, -1, nv).transpose(0, 2, 1)
        phi -= np.matmul(weighted, self._edge_test).transpose(0, 2, 1)
        bnd = np.matmul(weighted, self._edge_owner).transpose(0, 2, 1)
        pieces = fn * (sp.face_len[:, None] * ops.edge_w[None, :])[..., None]
        nv = fn.shape[-1]
        edge_pieces = np.zeros((sp.mesh.n_faces, sp.n_edge_sub, nv))
        for j in range(sp.n_edge_sub):
            edge_pieces[:, j] = pieces[:, ops.edge_sub == j].sum(axis=1)
        return Residual(phi, bnd, fn, edge_pieces, gamma)

    def rhs(self, moments: np.ndarray, gamma: float | None = None) -> np.ndarray:
        """Time derivative of the moments, M^-1 Phi."""
        r = self.residual(moments, gamma)
        return r.phi / self.space.det[:, None, None]


def ssp_rk3_step(
    euler_step: Callable[[np.ndarray, float], np.ndarray], moments: np.ndarray, dt: float
) -> np.ndarray:
    """Three-stage strong-stability-preserving Runge-Kutta step.

    ``euler_step(u, dt)`` must return the (possibly corrected) forward Euler
    update of ``u``; each stage is a convex combination of such updates.
    """
    u1 = euler_step(moments, dt)
    u2 = 0.75 * moments + 0.25 * euler_step(u1, dt)
    return moments / 3.0 + 2.0 / 3.0 * euler_step(u2, dt)
