"""Reference-cell operators linking modal coefficients and subcell means.

Everything here lives on the reference triangle. Because the maps to
physical cells are affine and the reference vertex order is fixed by the
widest-angle rule, these matrices are shared by every cell of a mesh.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSet
from .errors import DisconnectedGraph, SingularProjection
from .quadrature import gauss_legendre, polygon_rule, triangle_rule
from .subdivision import SubcellTopology, edge_point


def projection_matrix(basis: BasisSet, topo: SubcellTopology, degree: int | None = None) -> np.ndarray:
    """Matrix mapping modal coefficients to subcell means."""
    degree = 2 * basis.k + 2 if degree is None else degree
    out = np.zeros((topo.n_subcells, basis.n))
    for m, poly in enumerate(topo.polygons):
        pts, w = polygon_rule(topo.points[poly], degree)
        out[m] = w @ basis.eval(pts) / w.sum()
    return out


def graph_laplacian_pinv(incidence: np.ndarray, lam: float | None = None) -> np.ndarray:
    """Pseudo-inverse of L = A A^T via (L + lam Pi)^-1 - Pi / lam.

    Pi is the projector onto constants. The result does not depend on lam > 0;
    by default lam is the mean diagonal entry of L.
    """
    n = incidence.shape[0]
    lap = incidence @ incidence.T
    ones = np.full((n, n), 1.0 / n)
    if lam is None:
        lam = float(np.mean(np.diag(lap))) if n > 1 else 1.0
    if n > 1 and np.linalg.matrix_rank(lap) != n - 1:
        raise DisconnectedGraph("graph Laplacian has a kernel larger than the constants")
    return np.linalg.inv(lap + lam * ones) - ones / lam


def subresolution_coeffs(topo: SubcellTopology, proj: np.ndarray) -> np.ndarray:
    """Modal coefficients of the subresolution functions (row m is phi_m).

    phi_m is the L2 projection of the indicator of subcell m onto P^k, hence
    its coefficient vector is |S_m| times row m of the projection matrix when
    the reference mass matrix is the identity.
    """
    return topo.areas[:, None] * proj


def condition_numbers(proj: np.ndarray) -> dict[str, float]:
    """Infinity-norm condition numbers of the projection matrix.

    ``literal`` uses max row sums without absolute values; ``abs`` is the
    usual induced infinity norm.
    """
    inv = np.linalg.inv(proj)
    return {
        "literal": float(proj.sum(axis=1).max() * inv.sum(axis=1).max()),
        "abs": float(np.abs(proj).sum(axis=1).max() * np.abs(inv).sum(axis=1).max()),
    }


@dataclass
class CellOperators:
    topo: SubcellTopology
    basis: BasisSet
    basis_hi: BasisSet
    proj: np.ndarray
    proj_inv: np.ndarray
    frac: np.ndarray
    incidence: np.ndarray
    laplacian: np.ndarray
    lap_pinv: np.ndarray
    # volume quadrature
    vol_pts: np.ndarray
    vol_w: np.ndarray
    vol_phi: np.ndarray
    vol_dphi: np.ndarray
    # edge quadrature, identical on the three reference edges
    edge_t: np.ndarray
    edge_w: np.ndarray
    edge_owner: np.ndarray
    edge_sub: np.ndarray
    edge_phi: np.ndarray
    edge_onehot: np.ndarray
    # reconstruction maps: W = recon_phi @ Phi + recon_b @ B
    recon_phi: np.ndarray
    recon_b: np.ndarray
    # subcell quadrature for initial data
    sub_pts: np.ndarray
    sub_w: np.ndarray
    sub_owner: np.ndarray
    # subcell means of reference first and second derivatives
    mean_grad: np.ndarray
    mean_hess: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def k(self) -> int:
        return self.basis.k


def build_operators(topo: SubcellTopology) -> CellOperators:
    k = topo.k
    basis = BasisSet(k)
    basis_hi = BasisSet(k + 1)
    degree = 2 * k + 2
    proj = projection_matrix(basis, topo, degree)
    cond = np.linalg.cond(proj)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularProjection(f"projection matrix condition number {cond:.3e}")
    proj_inv = np.linalg.inv(proj)
    frac = topo.areas / 0.5
    inc = topo.incidence()
    lap = inc @ inc.T
    lap_pinv = graph_laplacian_pinv(inc)

    vol_pts, vol_w = triangle_rule(degree)
    vol_phi = basis.eval(vol_pts)
    vol_dphi = basis.grad(vol_pts)

    gl_t, gl_w = gauss_legendre(k + 2)
    ts, ws, owners, subs = [], [], [], []
    for j, (m, t0, t1) in enumerate(topo.boundary_subfaces[0]):
        ts.append(t0 + (t1 - t0) * gl_t)
        ws.append((t1 - t0) * gl_w)
        owners.append(np.full(len(gl_t), m))
        subs.append(np.full(len(gl_t), j))
    edge_t = np.concatenate(ts)
    edge_w = np.concatenate(ws)
    edge_sub = np.concatenate(subs)
    nsub = len(topo.boundary_subfaces[0])
    edge_owner = np.zeros((3, len(edge_t)), dtype=int)
    for e in range(3):
        for j, (m, _, _) in enumerate(topo.boundary_subfaces[e]):
            edge_owner[e, edge_sub == j] = m
    edge_phi = np.stack([basis.eval(edge_point(e, edge_t)) for e in range(3)])
    edge_onehot = np.zeros((3, len(edge_t), basis.n))
    for e in range(3):
        edge_onehot[e, np.arange(len(edge_t)), edge_owner[e]] = 1.0
    assert nsub == len(topo.boundary_subfaces[1]) == len(topo.boundary_subfaces[2])

    # M^-1 = I / 2|w| and D = |w| diag(frac), so Q M^-1 = diag(frac) P / 2
    recon_b = -inc.T @ lap_pinv
    recon_phi = recon_b @ (0.5 * frac[:, None] * proj)

    sp, sw, so = [], [], []
    grad_means = np.zeros((topo.n_subcells, basis.n, 2))
    hess_means = np.zeros((topo.n_subcells, basis.n, 3))
    for m, poly in enumerate(topo.polygons):
        p, w = polygon_rule(topo.points[poly], degree)
        sp.append(p)
        sw.append(w)
        so.append(np.full(len(w), m))
        grad_means[m] = np.einsum("q,qnd->nd", w, basis.grad(p)) / w.sum()
        hess_means[m] = np.einsum("q,qnd->nd", w, basis.hessian(p)) / w.sum()

    return CellOperators(
        topo=topo, basis=basis, basis_hi=basis_hi, proj=proj, proj_inv=proj_inv,
        frac=frac, incidence=inc, laplacian=lap, lap_pinv=lap_pinv,
        vol_pts=vol_pts, vol_w=vol_w, vol_phi=vol_phi, vol_dphi=vol_dphi,
        edge_t=edge_t, edge_w=edge_w, edge_owner=edge_owner, edge_sub=edge_sub,
        edge_phi=edge_phi, edge_onehot=edge_onehot,
        recon_phi=recon_phi, recon_b=recon_b,
        sub_pts=np.concatenate(sp), sub_w=np.concatenate(sw), sub_owner=np.concatenate(so),
        mean_grad=grad_means, mean_hess=hess_means,
    )
