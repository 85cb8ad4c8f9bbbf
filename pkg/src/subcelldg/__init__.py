"""Discontinuous Galerkin on triangles with a posteriori local subcell correction."""
from .driver import RunOptions, RunResult, Simulation, convergence_study, submean_errors
from .mesh import Mesh, generate_square_mesh, generate_step_mesh, generate_wedge_mesh, load_mesh
from .presets import PRESETS, get_preset
from .space import Space, build_space
from .subdivision import SubdivisionScheme, build_subdivision

__version__ = "0.1.0"

__all__ = [
    "Mesh", "PRESETS", "RunOptions", "RunResult", "Simulation", "Space", "SubdivisionScheme",
    "build_space", "build_subdivision", "convergence_study", "generate_square_mesh",
    "generate_step_mesh", "generate_wedge_mesh", "get_preset", "load_mesh", "submean_errors",
]
