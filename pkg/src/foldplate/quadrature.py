"""Quadrature on the reference triangle and unit interval, plus physical edge data.

The reference triangle is ``{x >= 0, y >= 0, x + y <= 1}`` with area 1/2.
Triangle rules are fully symmetric with positive weights and interior points.
Rules above degree 6 were obtained by solving the moment equations for a fixed
orbit structure and are stored to full double precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureRule",
    "PhysicalEdgeData",
    "triangle_rule",
    "edge_rule",
    "reference_edge_points",
    "REFERENCE_EDGE_NORMALS",
    "REFERENCE_EDGE_TANGENTS",
    "physical_edge_data",
]


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim)
    weights: np.ndarray  # (nq,)
    exact_degree: int

    @property
    def size(self) -> int:
        return len(self.weights)


# Orbit data: ("S3", w) | ("S21", a, w) | ("S111", a, b, w); weights sum to 1/2.
_TRIANGLE_ORBITS = {
    1: [("S3", 0.5)],
    2: [("S21", 1.0 / 6.0, 1.0 / 6.0)],
    4: [
        ("S21", 0.445948490915965, 0.223381589678011 / 2),
        ("S21", 0.091576213509771, 0.109951743655322 / 2),
    ],
    5: [
        ("S3", 0.225 / 2),
        ("S21", 0.470142064105115, 0.132394152788506 / 2),
        ("S21", 0.101286507323456, 0.125939180544827 / 2),
    ],
    6: [
        ("S21", 0.249286745170910, 0.116786275726379 / 2),
        ("S21", 0.063089014491502, 0.050844906370207 / 2),
        ("S111", 0.053145049844817, 0.310352451033784, 0.082851075618374 / 2),
    ],
    7: [
        ("S21", 0.17938814073328077, 0.03712386132957619),
        ("S21", 0.0590733026586495, 0.022181824341624756),
        ("S21", 0.41357245910364565, 0.05521687424365649),
        ("S111", 0.312862996180863, 0.028960601378265942, 0.02607205337590462),
    ],
    8: [
        ("S3", 0.07215780383888895),
        ("S21", 0.050547228317031005, 0.01622924881159955),
        ("S21", 0.17056930775174908, 0.051608685267361426),
        ("S21", 0.4592925882927152, 0.047545817133645925),
        ("S111", 0.2631128296346703, 0.00839477740994196, 0.013615157087215059),
    ],
    9: [
        ("S3", 0.04856789811608469),
        ("S21", 0.48968251917546507, 0.015667350134495737),
        ("S21", 0.04472951339601017, 0.012788837830217302),
        ("S21", 0.18820353560466313, 0.039823869463796964),
        ("S21", 0.43708959145630205, 0.038913770494502696),
        ("S111", 0.22196298916882515, 0.036838412048408355, 0.02164176968581287),
    ],
    10: [
        ("S3", 0.04087166457318827),
        ("S21", 0.032055373216629025, 0.006676484406448645),
        ("S21", 0.14216110105852378, 0.022978981802436037),
        ("S111", 0.02836766534066662, 0.1637017337357053, 0.012648878853880602),
        ("S111", 0.14813288578354017, 0.32181299529006685, 0.03195245319802075),
        ("S111", 0.3691467818272195, 0.029619889488430553, 0.01709232408145826),
    ],
}


def _expand_orbits(orbits):
    bary, weights = [], []
    for orbit in orbits:
        kind = orbit[0]
        if kind == "S3":
            bary.append((1 / 3, 1 / 3, 1 / 3))
            weights.append(orbit[1])
        elif kind == "S21":
            a, w = orbit[1:]
            b = 1.0 - 2.0 * a
            bary += [(a, a, b), (a, b, a), (b, a, a)]
            weights += [w] * 3
        else:
            a, b, w = orbit[1:]
            c = 1.0 - a - b
            bary += [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
            weights += [w] * 6
    bary = np.array(bary)
    return np.ascontiguousarray(bary[:, 1:]), np.array(weights)


def triangle_rule(min_degree: int) -> QuadratureRule:
    """Symmetric rule on the reference triangle exact for degree >= min_degree."""
    if not 1 <= min_degree <= 10:
        raise ValueError(f"unsupported triangle quadrature degree {min_degree}")
    degree = min(d for d in _TRIANGLE_ORBITS if d >= min_degree)
    points, weights = _expand_orbits(_TRIANGLE_ORBITS[degree])
    return QuadratureRule(points, weights, degree)


def edge_rule(n_points: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1]."""
    if not 1 <= n_points <= 10:
        raise ValueError(f"unsupported number of edge quadrature points {n_points}")
    x, w = np.polynomial.legendre.leggauss(n_points)
    return QuadratureRule(0.5 * (x + 1.0)[:, None], 0.5 * w, 2 * n_points - 1)


# Local edge i runs from local vertex i to local vertex (i + 1) % 3.
_EDGE_START = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
REFERENCE_EDGE_TANGENTS = np.array([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]])
REFERENCE_EDGE_NORMALS = np.array(
    [[0.0, -1.0], [1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)], [-1.0, 0.0]]
)


def reference_edge_points(local_edge: int, t) -> np.ndarray:
    """Reference coordinates of parameter values ``t`` on a local edge."""
    t = np.asarray(t, dtype=float)
    return _EDGE_START[local_edge] + t[..., None] * REFERENCE_EDGE_TANGENTS[local_edge]


@dataclass(frozen=True)
class PhysicalEdgeData:
    points: np.ndarray  # (nq, 2)
    weights: np.ndarray  # (nq,) arclength weights
    normals: np.ndarray  # (nq, 2) unit outward normals of the element
    ref_points: np.ndarray  # (nq, 2)


def _nanson(jac, local_edge):
    """Unit normals and edge-length factors from element Jacobians along an edge.

    ``jac`` has shape (..., 2, 2). Returns normals (..., 2) and |J t_hat| (...).
    """
    n_hat = REFERENCE_EDGE_NORMALS[local_edge]
    t_hat = REFERENCE_EDGE_TANGENTS[local_edge]
    det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    if np.any(det <= 0.0):
        raise ValueError("non-positive Jacobian determinant on edge")
    # det(J) J^{-T} = cofactor matrix
    cof = np.stack(
        [
            np.stack([jac[..., 1, 1], -jac[..., 1, 0]], axis=-1),
            np.stack([-jac[..., 0, 1], jac[..., 0, 0]], axis=-1),
        ],
        axis=-2,
    )
    n = cof @ n_hat
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    stretch = np.linalg.norm(jac @ t_hat, axis=-1)
    return n, stretch


def physical_edge_data(geometry, element: int, local_edge: int, rule: QuadratureRule) -> PhysicalEdgeData:
    """Quadrature points, arclength weights and unit normals on one element edge.

    ``geometry`` is a :class:`foldplate.mesh.Mesh` (anything with ``map_derivatives``).
    """
    ref = reference_edge_points(local_edge, rule.points[:, 0])
    geo = geometry.map_derivatives(element, ref, order=1)
    normals, stretch = _nanson(geo["J"], local_edge)
    return PhysicalEdgeData(geo["point"], rule.weights * stretch, normals, ref)
