import functools
import tempfile

import numpy as np
import pytest

from foldplate.experiments import PRESETS, run
from foldplate.mesh import InterfaceSpec, build_structured_mesh, classify_edges, mesh_from_triangles, refine_uniform

# Interface geometries used across the suite; the first four are the convergence-table columns.
CASES = {
    "nofold": InterfaceSpec("none"),
    "straight": InterfaceSpec("straight"),
    "pwlinear": InterfaceSpec("sine", 1),
    "pwquadratic": InterfaceSpec("sine", 2),
    "quadratic": InterfaceSpec("quadratic"),
}
TABLE1_CASES = ("nofold", "straight", "pwlinear", "pwquadratic")

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def mesh_at(case: str, level: int, k_geo: int = 2, dirichlet: str = "all"):
    if level == 0:
        mesh = build_structured_mesh(4, CASES[case], k_geo)
    else:
        mesh = refine_uniform(mesh_at(case, level - 1, k_geo, dirichlet))
    return classify_edges(mesh, dirichlet)


@functools.lru_cache(maxsize=None)
def preset_manifest(name: str) -> dict:
    """Manifest of a builtin preset, run once per session into a scratch directory."""
    return run(PRESETS[name], output_dir=tempfile.mkdtemp(prefix="foldplate-"))


def two_element_square(k_geo: int = 2, dirichlet: str = "all"):
    mesh = mesh_from_triangles([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]], k_geo)
    return classify_edges(mesh, dirichlet)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
