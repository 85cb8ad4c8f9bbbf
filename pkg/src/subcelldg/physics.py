"""Conservation-law models, boundary ghost states and the Lax-Friedrichs flux.

States carry a trailing variable axis: scalar models use shape (..., 1),
Euler uses (..., 4) with (rho, rho u, rho v, E). Fluxes have shape
(..., n_vars, 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import NonPhysicalState

BoundaryKind = Literal["periodic", "symmetry_wall", "inflow", "outflow"]


@dataclass(frozen=True)
class BoundarySpec:
    kind: BoundaryKind
    state: Optional[tuple[float, ...]] = None
    pair: Optional[str] = None

    @classmethod
    def periodic(cls, pair: str) -> "BoundarySpec":
        return cls("periodic", pair=pair)

    @classmethod
    def wall(cls) -> "BoundarySpec":
        return cls("symmetry_wall")

    @classmethod
    def inflow(cls, state: Sequence[float]) -> "BoundarySpec":
        return cls("inflow", state=tuple(float(v) for v in state))

    @classmethod
    def outflow(cls) -> "BoundarySpec":
        return cls("outflow")


class Model:
    """Base class. Subclasses define ``flux`` and ``wavespeed``."""

    n_vars = 1
    var_names: tuple[str, ...] = ("u",)
    nad_index = 0
    space_dependent = False

    def flux(self, u: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        raise NotImplementedError

    def wavespeed(self, u: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        """Upper bound of |d(F.n)/du| over unit normals n, per state."""
        raise NotImplementedError

    def normal_flux(self, u: np.ndarray, n: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        f = self.flux(u, x)
        return f[..., 0] * n[..., None, 0] + f[..., 1] * n[..., None, 1]

    def admissible(self, u: np.ndarray, bounds: tuple[float, float] | None = None, tol: float = 0.0) -> np.ndarray:
        """Physical admissibility per state; NaNs are never admissible."""
        ok = np.all(np.isfinite(u), axis=-1)
        if bounds is not None:
            lo, hi = bounds
            slack = tol * max(1.0, abs(lo), abs(hi))
            v = u[..., 0]
            ok &= (v >= lo - slack) & (v <= hi + slack)
        return ok

    def ghost(self, u: np.ndarray, spec: BoundarySpec, n: np.ndarray) -> np.ndarray:
        if spec.kind == "inflow":
            return np.broadcast_to(np.asarray(spec.state, float), u.shape).copy()
        if spec.kind in ("outflow", "symmetry_wall"):
            return u.copy()
        raise ValueError(f"no ghost state for boundary kind {spec.kind!r}")


class LinearAdvection(Model):
    def __init__(self, velocity: Sequence[float] = (1.0, 1.0)):
        self.velocity = np.asarray(velocity, float)

    def flux(self, u, x=None):
        return u[..., None] * self.velocity

    def wavespeed(self, u, x=None):
        return np.full(u.shape[:-1], np.linalg.norm(self.velocity))


class RotatingAdvection(Model):
    """Solid-body rotation about ``centre`` with unit angular speed."""

    space_dependent = True

    def __init__(self, centre: Sequence[float] = (0.5, 0.5)):
        self.centre = np.asarray(centre, float)

    def velocity(self, x: np.ndarray) -> np.ndarray:
        return np.stack([self.centre[1] - x[..., 1], x[..., 0] - self.centre[0]], axis=-1)

    def flux(self, u, x=None):
        return u[..., None] * self.velocity(x)[..., None, :]

    def wavespeed(self, u, x=None):
        return np.broadcast_to(np.linalg.norm(self.velocity(x), axis=-1), u.shape[:-1])


class Burgers(Model):
    """F(u) = (u^2 / 2, u^2 / 2)."""

    def flux(self, u, x=None):
        f = 0.5 * u * u
        return np.stack([f, f], axis=-1)

    def wavespeed(self, u, x=None):
        return np.sqrt(2.0) * np.abs(u[..., 0])


class KPP(Model):
    """Non-convex flux F(u) = (sin u, cos u)."""

    def flux(self, u, x=None):
        return np.stack([np.sin(u), np.cos(u)], axis=-1)

    def wavespeed(self, u, x=None):
        return np.ones(u.shape[:-1])


class Euler(Model):
    """Compressible Euler equations for a polytropic gas."""

    n_vars = 4
    var_names = ("rho", "rho_u", "rho_v", "E")
    nad_index = 3

    def __init__(self, gamma: float = 1.4):
        self.gamma = float(gamma)

    def pressure(self, u: np.ndarray) -> np.ndarray:
        rho = u[..., 0]
        kin = 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho
        return (self.gamma - 1.0) * (u[..., 3] - kin)

    def internal_energy(self, u: np.ndarray) -> np.ndarray:
        rho = u[..., 0]
        return (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho) / rho

    def from_primitive(self, rho, vx, vy, p) -> np.ndarray:
        rho, vx, vy, p = np.broadcast_arrays(*(np.asarray(a, float) for a in (rho, vx, vy, p)))
        e = p / (self.gamma - 1.0) + 0.5 * rho * (vx**2 + vy**2)
        return np.stack([rho, rho * vx, rho * vy, e], axis=-1)

    def flux(self, u, x=None):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = u[..., 0]
            vx = u[..., 1] / rho
            vy = u[..., 2] / rho
            p = self.pressure(u)
            fx = np.stack([u[..., 1], u[..., 1] * vx + p, u[..., 2] * vx, (u[..., 3] + p) * vx], axis=-1)
            fy = np.stack([u[..., 2], u[..., 1] * vy, u[..., 2] * vy + p, (u[..., 3] + p) * vy], axis=-1)
        return np.stack([fx, fy], axis=-1)

    def wavespeed(self, u, x=None):
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = u[..., 0]
            p = self.pressure(u)
            c = np.sqrt(self.gamma * np.maximum(p, 0.0) / rho)
            return np.hypot(u[..., 1], u[..., 2]) / rho + c

    def admissible(self, u, bounds=None, tol=0.0):
        ok = np.all(np.isfinite(u), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ok &= u[..., 0] > 0.0
            ok &= self.internal_energy(u) > 0.0
        return ok

    def ghost(self, u, spec, n):
        if spec.kind == "symmetry_wall":
            g = u.copy()
            qn = u[..., 1] * n[..., 0] + u[..., 2] * n[..., 1]
            g[..., 1] = u[..., 1] - 2.0 * qn * n[..., 0]
            g[..., 2] = u[..., 2] - 2.0 * qn * n[..., 1]
            return g
        return super().ghost(u, spec, n)


def lax_friedrichs(
    model: Model,
    u_left: np.ndarray,
    u_right: np.ndarray,
    normal: np.ndarray,
    gamma: float,
    x: np.ndarray | None = None,
) -> np.ndarray:
    """Global Lax-Friedrichs flux 0.5 (F(u)+F(v)).n - 0.5 gamma (v - u)."""
    fl = model.normal_flux(u_left, normal, x)
    fr = model.normal_flux(u_right, normal, x)
    return 0.5 * (fl + fr) - 0.5 * gamma * (u_right - u_left)


def check_admissible(model: Model, u: np.ndarray, bounds=None, what: str = "state") -> None:
    bad = ~model.admissible(u, bounds)
    if np.any(bad):
        raise NonPhysicalState(f"{int(bad.sum())} non-admissible {what}(s)")
