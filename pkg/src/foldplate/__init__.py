"""Interior penalty dG solver for Kirchhoff plates with a folding interface."""
from .analysis import dg_error, dg_norm, energy_density, error_series, extrapolate
from .assembly import ProblemSpec, SparseSystem, assemble, assemble_norm_matrix
from .experiments import PRESETS, ExperimentConfig, load_config, run
from .mesh import (
    DirichletSpec,
    EdgeClass,
    InterfaceSpec,
    Mesh,
    MeshError,
    build_structured_mesh,
    classify_edges,
    refine_uniform,
)
from .solver import SolverError, solve, solve_cg, solve_direct
from .spaces import SolutionField, interpolate
from .vtk import write_vtk

__version__ = "0.1.0"
