"""Benchmark problem definitions: model, mesh, initial data and boundaries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mesh import Mesh, generate_square_mesh, generate_step_mesh, generate_wedge_mesh
from .reference import radial_euler
from .physics import KPP, BoundarySpec, Burgers, Euler, LinearAdvection, Model, RotatingAdvection

SEDOV_ENERGY = 0.244816  # quarter-plane blast energy giving a unit shock radius at t = 1


@dataclass
class Preset:
    name: str
    model: Model
    mesh: Callable[[int], Mesh]
    default_resolution: int
    initial: Callable[[np.ndarray], np.ndarray]
    boundary: dict[str, BoundarySpec]
    t_end: float
    bounds: Optional[tuple[float, float]] = None
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    profile: str = "x+y-1"
    post_init: Optional[Callable] = None
    extra: dict = field(default_factory=dict)


def _wrap(x: np.ndarray, t: float, velocity=(1.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    return np.mod(x[..., 0] - velocity[0] * t, 1.0), np.mod(x[..., 1] - velocity[1] * t, 1.0)


def sine_wave(x: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * (x[..., 0] + x[..., 1]))


def crenel(x: np.ndarray) -> np.ndarray:
    s = x[..., 0] + x[..., 1]
    out = np.full(s.shape, 0.5)
    one = ((s >= 0.25) & (s <= 0.5)) | ((s >= 1.25) & (s <= 1.5))
    zero = ((s >= 0.75) & (s <= 1.0)) | ((s >= 1.75) & (s <= 2.0))
    out[one] = 1.0
    out[zero] = 0.0
    return out


def rotation_shapes(x: np.ndarray) -> np.ndarray:
    """Slotted disk, cone and smooth hump of radius 0.15."""
    r0 = 0.15
    px, py = x[..., 0], x[..., 1]
    out = np.zeros(px.shape)
    rd = np.hypot(px - 0.5, py - 0.75) / r0
    slot = (np.abs(px - 0.5) < 0.025) & (py < 0.85)
    out[(rd <= 1.0) & ~slot] = 1.0
    rc = np.hypot(px - 0.5, py - 0.25) / r0
    cone = rc <= 1.0
    out[cone] = 1.0 - rc[cone]
    rh = np.hypot(px - 0.25, py - 0.5) / r0
    hump = rh <= 1.0
    out[hump] = 0.25 * (1.0 + np.cos(np.pi * rh[hump]))
    return out


def _periodic_square(n: int) -> Mesh:
    return generate_square_mesh(n, periodic=True)


def smooth_advection() -> Preset:
    return Preset(
        name="smooth_advection", model=LinearAdvection((1.0, 1.0)), mesh=_periodic_square,
        default_resolution=5, initial=lambda x: sine_wave(x)[..., None],
        boundary={}, t_end=1.0, bounds=(-1.0, 1.0),
        exact=lambda x, t: sine_wave(np.stack(_wrap(x, t), -1))[..., None],
        extra={"h_per_n": 0.5},  # h is the half side of the 4-split squares
    )


def crenel_advection() -> Preset:
    return Preset(
        name="crenel", model=LinearAdvection((1.0, 1.0)), mesh=_periodic_square,
        default_resolution=12, initial=lambda x: crenel(x)[..., None],
        boundary={}, t_end=1.0, bounds=(0.0, 1.0),
        exact=lambda x, t: crenel(np.stack(_wrap(x, t), -1))[..., None],
    )


def rotation() -> Preset:
    return Preset(
        name="rotation", model=RotatingAdvection((0.5, 0.5)),
        mesh=lambda n: generate_square_mesh(n), default_resolution=16,
        initial=lambda x: rotation_shapes(x)[..., None],
        boundary={"default": BoundarySpec.inflow((0.0,))}, t_end=2.0 * np.pi, bounds=(0.0, 1.0),
        exact=lambda x, t: rotation_shapes(_rotate_back(x, t))[..., None], profile="y=0.25",
    )


def _rotate_back(x: np.ndarray, t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    dx, dy = x[..., 0] - 0.5, x[..., 1] - 0.5
    return np.stack([0.5 + c * dx + s * dy, 0.5 - s * dx + c * dy], -1)


def burgers() -> Preset:
    return Preset(
        name="burgers", model=Burgers(), mesh=_periodic_square, default_resolution=12,
        initial=lambda x: sine_wave(x)[..., None], boundary={}, t_end=0.5, bounds=(-1.0, 1.0),
    )


def kpp(ic: str = "radial") -> Preset:
    lo, hi = np.pi / 4.0, 3.5 * np.pi

    def init(x):
        if ic == "halfplane":
            inside = x[..., 0] < 0.5
        else:
            inside = np.hypot(x[..., 0], x[..., 1]) <= 1.0
        return np.where(inside, hi, lo)[..., None]

    return Preset(
        name="kpp", model=KPP(),
        mesh=lambda n: generate_square_mesh(n, box=(-2.0, 2.0, -2.5, 1.5)), default_resolution=16,
        initial=init, boundary={"default": BoundarySpec.inflow((lo,))}, t_end=1.0, bounds=(lo, hi),
        profile="x+y-1", extra={"ic": ic},
    )


def sod(gamma: float = 1.4) -> Preset:
    model = Euler(gamma)

    def init(x):
        r = np.hypot(x[..., 0], x[..., 1])
        left = r < 0.5
        return model.from_primitive(np.where(left, 1.0, 0.125), 0.0, 0.0, np.where(left, 1.0, 0.1))

    return Preset(
        name="sod", model=model,
        mesh=lambda n: generate_wedge_mesh(0.0, 1.0, np.pi / 4, n, n), default_resolution=15,
        initial=init,
        boundary={"axis0": BoundarySpec.wall(), "axis1": BoundarySpec.wall(), "outer": BoundarySpec.outflow()},
        t_end=0.2, profile="radius",
        extra={"reference": lambda t, n=2000: radial_euler((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 0.5, t, n=n,
                                                         gamma=gamma)},
    )


def sedov(gamma: float = 1.4, energy: float = SEDOV_ENERGY) -> Preset:
    model = Euler(gamma)
    theta_max = np.pi / 4

    def init(x):
        return model.from_primitive(np.ones(x.shape[:-1]), 0.0, 0.0, 1e-14)

    def deposit(space, ubar):
        """Put the blast energy in the subcell(s) touching the origin."""
        verts = space.to_physical(space.sub_vertex_ref).reshape(space.n_subcells, -1, 2)
        at_origin = np.any(np.linalg.norm(verts, axis=2) < 1e-12, axis=1)
        vol = space.sub_area[at_origin].sum()
        # the energy is quoted for a quarter plane; scale to the sector angle
        e_sector = energy * theta_max / (np.pi / 2)
        p = (gamma - 1.0) * e_sector / vol
        ubar[at_origin] = model.from_primitive(1.0, 0.0, 0.0, p)
        return ubar

    return Preset(
        name="sedov", model=model,
        mesh=lambda n: generate_wedge_mesh(0.0, 1.2, theta_max, n, max(1, (11 * n) // 24)), default_resolution=24,
        initial=init,
        boundary={"axis0": BoundarySpec.wall(), "axis1": BoundarySpec.wall(), "outer": BoundarySpec.outflow()},
        t_end=1.0, profile="radius", post_init=deposit,
    )


def forward_step(gamma: float = 1.4) -> Preset:
    model = Euler(gamma)
    state = tuple(model.from_primitive(1.4, 3.0, 0.0, 1.0))
    return Preset(
        name="step", model=model,
        mesh=lambda n: generate_step_mesh(9 * n // 10 + 4 * n, 2 * n, nx_step=9 * n // 10), default_resolution=10,
        initial=lambda x: np.broadcast_to(np.asarray(state), x.shape[:-1] + (4,)).copy(),
        boundary={"inflow": BoundarySpec.inflow(state), "outflow": BoundarySpec.outflow(),
                  "wall": BoundarySpec.wall()},
        t_end=4.0, profile="y=0.5",
    )


PRESETS: dict[str, Callable[..., Preset]] = {
    "smooth_advection": smooth_advection,
    "crenel": crenel_advection,
    "rotation": rotation,
    "burgers": burgers,
    "kpp": kpp,
    "sod": sod,
    "sedov": sedov,
    "step": forward_step,
}


ALIASES = {
    "advection_smooth": "smooth_advection", "advection": "smooth_advection",
    "crenel_advection": "crenel", "advection_crenel": "crenel",
    "sod_cyl": "sod", "forward_step": "step",
}


def get_preset(name: str, **kwargs) -> Preset:
    key = name.strip().lower().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[key](**kwargs)
