"""Run loops: time integration with correction, error norms and convergence studies."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .correction import CorrectionMode, Corrector, DetectionConfig, Detector
from .dg import DGSolver, SolutionState, ssp_rk3_step
from .errors import NonPhysicalState
from .mesh import Mesh
from .physics import BoundarySpec
from .presets import Preset
from .space import Space, build_space
from .subdivision import SubdivisionScheme

log = logging.getLogger(__name__)


@dataclass
class RunOptions:
    order: int = 2
    scheme: str = "structured_uniform"
    correction: CorrectionMode = "blended"
    cfl: float = 0.95
    t_end: Optional[float] = None
    max_steps: Optional[int] = None
    convergence_dt: bool = False
    neighbours: str = "subcell"
    relax: bool = True
    relax_level: str = "subcell"
    max_iter: int = 10
    volume_flux: str = "exact"


@dataclass
class RunResult:
    state: SolutionState
    space: Space
    solver: DGSolver
    corrector: Corrector
    steps: int
    wall_time: float
    history: list = field(default_factory=list)

    @property
    def submeans(self) -> np.ndarray:
        return self.solver.submeans(self.state.moments)


class Simulation:
    def __init__(self, preset: Preset, mesh: Mesh, options: RunOptions):
        self.preset = preset
        self.options = options
        boundary = dict(preset.boundary)
        self.space = build_space(mesh, options.order, SubdivisionScheme.parse(options.scheme), boundary)
        self.solver = DGSolver(self.space, preset.model, options.volume_flux)
        cfg = DetectionConfig(
            bounds=preset.bounds, neighbours=options.neighbours, relax=options.relax,
            relax_level=options.relax_level,
        )
        self.detector = Detector(self.solver, cfg)
        self.corrector = Corrector(self.solver, self.detector, options.correction, options.max_iter)

    def initial_state(self) -> SolutionState:
        ubar = self.solver.exact_submeans(self.preset.initial)
        if self.preset.post_init is not None:
            ubar = self.preset.post_init(self.space, ubar)
        if not np.all(self.preset.model.admissible(ubar)):
            raise NonPhysicalState("initial subcell means are not admissible")
        return SolutionState(0.0, self.solver.moments_from_submeans(ubar))

    def timestep(self, moments: np.ndarray) -> float:
        dt = self.solver.cfl_timestep(moments, self.options.cfl)
        if self.options.convergence_dt:
            sp = self.space
            dt = min(dt, float(np.min(sp.cell_length)) ** ((sp.k + 1) / 3.0))
        return dt

    def run(
        self,
        state: SolutionState | None = None,
        callback: Optional[Callable[[int, SolutionState], None]] = None,
    ) -> RunResult:
        state = state or self.initial_state()
        t_end = self.options.t_end if self.options.t_end is not None else self.preset.t_end
        steps = 0
        start = time.perf_counter()
        while state.t < t_end - 1e-14 * max(1.0, t_end):
            if self.options.max_steps is not None and steps >= self.options.max_steps:
                break
            dt = min(self.timestep(state.moments), t_end - state.t)
            moments = ssp_rk3_step(self.corrector.euler_step, state.moments, dt)
            state = SolutionState(state.t + dt, moments)
            steps += 1
            if callback is not None:
                callback(steps, state)
        wall = time.perf_counter() - start
        log.info("%s: %d steps to t=%.4g in %.1fs", self.preset.name, steps, state.t, wall)
        return RunResult(state, self.space, self.solver, self.corrector, steps, wall)


def submean_errors(result: RunResult, exact: Callable[[np.ndarray], np.ndarray], var: int = 0) -> dict[str, float]:
    """L1, L2 and Linf errors of subcell means against exact subcell means."""
    solver = result.solver
    ref = solver.exact_submeans(exact)[:, var]
    num = result.submeans[:, var]
    area = result.space.sub_area
    err = np.abs(num - ref)
    total = area.sum()
    return {
        "L1": float((area * err).sum() / total),
        "L2": float(np.sqrt((area * err**2).sum() / total)),
        "Linf": float(err.max()),
    }


def convergence_study(
    preset: Preset,
    resolutions: list[int],
    options: RunOptions,
    mesh_factory: Callable[[int], Mesh] | None = None,
) -> list[dict]:
    """Errors and observed orders over a family of meshes.

    ``h`` is ``preset.extra["h_per_n"] / n`` (default ``1 / n``).
    """
    if preset.exact is None:
        raise ValueError(f"preset {preset.name} has no exact solution")
    rows = []
    factory = mesh_factory or preset.mesh
    for n in resolutions:
        sim = Simulation(preset, factory(n), options)
        res = sim.run()
        t = res.state.t
        errs = submean_errors(res, lambda x: preset.exact(x, t))
        rows.append({"n": n, "h": preset.extra.get("h_per_n", 1.0) / n, "steps": res.steps, **errs,
                     "recomputed": res.corrector.log.total_recomputed})
    for i in range(1, len(rows)):
        for key in ("L1", "L2", "Linf"):
            rows[i][f"order_{key}"] = float(
                np.log(rows[i - 1][key] / rows[i][key]) / np.log(rows[i]["n"] / rows[i - 1]["n"])
            )
    return rows
