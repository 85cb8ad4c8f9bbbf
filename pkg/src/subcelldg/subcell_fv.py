"""Subcell finite-volume view of the DG scheme.

The DG update of the subcell means can be rewritten as a conservative
finite-volume update on the subcells. Interior subcell faces then carry
reconstructed fluxes, while subcell pieces of the cell boundary keep the DG
numerical flux. Two routes to the reconstructed fluxes are provided: one
from the DG residual and one from the projected interior flux; they agree up
to the kernel of the incidence matrix.
"""
from __future__ import annotations

import numpy as np

from .dg import DGSolver, Residual
from .errors import CompatibilityViolated


def reconstructed_fluxes(solver: DGSolver, res: Residual) -> np.ndarray:
    """Interior-face fluxes from the residual, shape (n_cells, n_if, nv).

    Each value is the flux integrated over the face in the direction of the
    face normal (from its first subcell to its second).
    """
    ops = solver.space.ops
    return np.einsum("fm,cmv->cfv", ops.recon_phi, res.phi) + np.einsum(
        "fm,cmv->cfv", ops.recon_b, res.boundary
    )


def compatibility_defect(solver: DGSolver, res: Residual) -> np.ndarray:
    """Per cell, sum over subcells of Q M^-1 Phi + B (zero up to round-off)."""
    ops = solver.space.ops
    q = 0.5 * ops.frac[:, None] * ops.proj
    return np.einsum("mn,cnv->cv", q, res.phi) + res.boundary.sum(axis=1)


def check_compatibility(solver: DGSolver, res: Residual, rtol: float = 1e-10) -> None:
    d = np.abs(compatibility_defect(solver, res))
    scale = np.abs(res.boundary).sum(axis=1) + np.abs(res.phi).sum(axis=1) + 1e-300
    worst = float((d / scale).max())
    if worst > rtol:
        raise CompatibilityViolated(f"relative compatibility defect {worst:.3e}")


def submean_rhs(solver: DGSolver, fluxes: np.ndarray, res: Residual) -> np.ndarray:
    """Finite-volume time derivative -(A W + B) / |S_m|, shape (n_subcells, nv)."""
    sp = solver.space
    aw = np.einsum("mf,cfv->cmv", sp.ops.incidence, fluxes)
    return -((aw + res.boundary).reshape(sp.n_subcells, -1)) / sp.sub_area[:, None]


def residual_submean_rhs(solver: DGSolver, res: Residual) -> np.ndarray:
    """Subcell-mean time derivative P M^-1 Phi, shape (n_subcells, nv)."""
    sp = solver.space
    return solver.submeans(res.phi / sp.det[:, None, None])


def global_face_fluxes(solver: DGSolver, fluxes: np.ndarray, res: Residual) -> np.ndarray:
    """High-order fluxes on every global subcell face, shape (n_gfaces, nv)."""
    nv = fluxes.shape[-1]
    return np.concatenate([fluxes.reshape(-1, nv), res.edge_pieces.reshape(-1, nv)])


def project_interior_flux(solver: DGSolver, moments: np.ndarray) -> np.ndarray:
    """Modal coefficients of the P^{k+1} projection of F(u_h), (n_cells, N_{k+1}, nv, 2)."""
    ops = solver.space.ops
    uq = np.einsum("qm,cmv->cqv", ops.vol_phi, moments)
    f = solver.model.flux(uq, solver.space.vol_x)
    return np.einsum("q,qj,cqvd->cjvd", ops.vol_w, solver._vol_hi, f)


def flux_form_fluxes(solver: DGSolver, moments: np.ndarray, res: Residual) -> np.ndarray:
    """Interior-face fluxes from the projected flux and boundary flux defects.

    W = F_c - A^T Lpinv G, where F_c integrates the projected flux across each
    interior face and G_m integrates (F_h.n - numerical flux) against the
    subresolution function of subcell m, shifted by -1 on the part of the
    cell boundary that belongs to subcell m.
    """
    sp, ops = solver.space, solver.space.ops
    topo = ops.topo
    coef = project_interior_flux(solver, moments)
    hi = ops.basis_hi
    nv = moments.shape[-1]

    # interior faces: Gauss-Legendre on each segment, exact for degree k+1
    from .quadrature import gauss_legendre

    gt, gw = gauss_legendre(sp.k + 2)
    seg = topo.face_segments()
    nif = topo.n_interior_faces
    fc = np.zeros((sp.n_cells, nif, nv))
    if nif:
        pts = seg[:, None, 0, :] + gt[None, :, None] * (seg[:, None, 1, :] - seg[:, None, 0, :])
        vals = hi.eval(pts.reshape(-1, 2)).reshape(nif, len(gt), -1)
        fq = np.einsum("fqj,cjvd->cfqvd", vals, coef)
        pa = sp.to_physical(seg[:, 0])
        pb = sp.to_physical(seg[:, 1])
        tang = pb - pa
        normal_len = np.stack([tang[..., 1], -tang[..., 0]], axis=-1)  # |n| = face length
        fc = np.einsum("q,cfqvd,cfd->cfv", gw, fq, normal_len)

    # boundary defect against subresolution functions
    sub_coef = 0.5 * ops.frac[:, None] * ops.proj  # phi_m = sum_n sub_coef[m, n] sigma_n
    g = np.zeros((sp.n_cells, topo.n_subcells, nv))
    from .subdivision import edge_point

    for e in range(3):
        pts = edge_point(e, ops.edge_t)
        fh = np.einsum("pj,cjvd->cpvd", hi.eval(pts), coef)
        faces = sp.mesh.cell_faces[:, e]
        is_left = sp.face_left[faces] == np.arange(sp.n_cells)
        nrm = np.where(is_left[:, None], 1.0, -1.0) * sp.face_normal[faces]
        fhn = np.einsum("cpvd,cd->cpv", fh, nrm)
        num = np.where(is_left[:, None, None], res.face_flux[faces], -res.face_flux[faces][:, ::-1])
        defect = (fhn - num) * (sp.cell_edge_len[:, e, None] * ops.edge_w[None, :])[..., None]
        phis = ops.basis.eval(pts) @ sub_coef.T - ops.edge_onehot[e]
        g += np.einsum("pm,cpv->cmv", phis, defect)
    return fc - np.einsum("mf,mn,cnv->cfv", ops.incidence, ops.lap_pinv, g)
