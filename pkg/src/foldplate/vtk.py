"""Legacy ASCII VTK export of meshes and discontinuous fields.

Each element is split into four subcells of the geometry degree (VTK type 22
for quadratic geometry, 69 for cubic Lagrange triangles) so that curved edges
and the discontinuous field are drawn faithfully. Points are not shared
between elements.
"""
from __future__ import annotations

import numpy as np

from .spaces import element_shapes, lagrange_nodes

__all__ = ["write_vtk", "subcell_reference_points", "VTK_CELL_TYPES"]

VTK_CELL_TYPES = {1: 5, 2: 22, 3: 69}

# red refinement of the reference triangle, counter-clockwise corners
_SUBTRIANGLES = np.array(
    [
        [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]],
        [[0.5, 0.0], [1.0, 0.0], [0.5, 0.5]],
        [[0.0, 0.5], [0.5, 0.5], [0.0, 1.0]],
        [[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]],
    ]
)


def subcell_reference_points(degree: int, subdivide: bool = True) -> np.ndarray:
    """Reference points of the subcell nodes, shape (cells, nodes, 2)."""
    nodes = lagrange_nodes(degree)
    if not subdivide:
        return nodes[None]
    a, b, c = _SUBTRIANGLES[:, 0], _SUBTRIANGLES[:, 1], _SUBTRIANGLES[:, 2]
    return a[:, None] + nodes[None, :, :1] * (b - a)[:, None] + nodes[None, :, 1:] * (c - a)[:, None]


def write_vtk(path, mesh, solution=None, cell_data=None, subdivide: bool = True, title: str = "foldplate") -> None:
    """Write ``mesh`` (and optionally a field and per-element data) as legacy VTK.

    ``solution`` is a :class:`SolutionField` exported as point data ``u_h``;
    ``cell_data`` maps names to per-element arrays, repeated on subcells.
    """
    degree = mesh.k_geo
    ref = subcell_reference_points(degree, subdivide)
    n_sub, n_loc = ref.shape[:2]
    flat = ref.reshape(-1, 2)
    elements = np.arange(mesh.n_elements)
    points = mesh.geometry(elements, flat, order=0)["point"].reshape(-1, 2)
    n_cells = mesh.n_elements * n_sub
    conn = np.arange(n_cells * n_loc).reshape(n_cells, n_loc)

    with open(path, "w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(points)} double\n")
        np.savetxt(fh, np.column_stack([points, np.zeros(len(points))]), fmt="%.12g")
        fh.write(f"CELLS {n_cells} {n_cells * (n_loc + 1)}\n")
        np.savetxt(fh, np.column_stack([np.full(n_cells, n_loc), conn]), fmt="%d")
        fh.write(f"CELL_TYPES {n_cells}\n")
        np.savetxt(fh, np.full(n_cells, VTK_CELL_TYPES[degree]), fmt="%d")

        cells = {"subdomain": mesh.subdomain_of_elements(), "curved": mesh.curved.astype(int)}
        cells.update(cell_data or {})
        fh.write(f"CELL_DATA {n_cells}\n")
        for name, values in cells.items():
            values = np.repeat(np.asarray(values, dtype=float), n_sub)
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            np.savetxt(fh, values, fmt="%.12g")

        if solution is not None:
            coef = solution.element_coefficients()
            values = np.empty((mesh.n_elements, len(flat)))
            for start in range(0, mesh.n_elements, 4096):
                el = elements[start : start + 4096]
                sh, _ = element_shapes(mesh, el, flat, solution.k, max_order=0)
                values[el] = np.einsum("en,eqn->eq", coef[el], sh[0])
            fh.write(f"POINT_DATA {len(points)}\nSCALARS u_h double 1\nLOOKUP_TABLE default\n")
            np.savetxt(fh, values.ravel(), fmt="%.12g")
