"""Discontinuous isoparametric Lagrange spaces.

Basis functions live on the reference triangle and are pulled to each element
through the inverse of its geometry map. Physical derivatives up to third order
are obtained analytically from the derivatives of the inverse map, which in turn
come from differentiating ``psi(psi^{-1}(x)) = x`` repeatedly.

Array conventions (``e`` elements, ``q`` points, ``i`` basis functions):

* values ``(e, q, i)``
* gradients ``(e, q, i, 2)``
* Hessians ``(e, q, i, 2, 2)``
* third derivatives ``(e, q, i, 2, 2, 2)``
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "ReferenceBasis",
    "reference_basis",
    "DofMap",
    "inverse_map_derivatives",
    "transport_derivatives",
    "physical_shape",
    "evaluate_field",
    "interpolate",
    "SolutionField",
]


def lagrange_nodes(k: int) -> np.ndarray:
    """Uniform Lagrange nodes: vertices, then edge nodes edge by edge, then interior."""
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    nodes = list(verts)
    for e in range(3):
        a, b = verts[e], verts[(e + 1) % 3]
        for i in range(1, k):
            nodes.append(a + (b - a) * i / k)
    for j in range(1, k):
        for i in range(1, k - j):
            nodes.append(np.array([i / k, j / k]))
    return np.array(nodes)


def _falling(n, m):
    out = np.ones_like(n, dtype=float)
    for r in range(m):
        out = out * (n - r)
    return out


class ReferenceBasis:
    """Nodal Lagrange basis of degree ``k`` on the reference triangle."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("degree must be >= 1")
        self.k = k
        self.nodes = lagrange_nodes(k)
        self.exponents = np.array([(a, d - a) for d in range(k + 1) for a in range(d, -1, -1)])
        vander = self._monomials(self.nodes, 0, 0)
        # columns of coeffs: basis functions in the monomial basis
        self.coeffs = np.linalg.solve(vander, np.eye(len(self.nodes)))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def _monomials(self, pts, dx, dy):
        pts = np.atleast_2d(pts)
        ax, ay = self.exponents[:, 0], self.exponents[:, 1]
        px = np.clip(ax - dx, 0, None)
        py = np.clip(ay - dy, 0, None)
        scale = _falling(ax, dx) * _falling(ay, dy)
        return scale * pts[:, :1] ** px * pts[:, 1:2] ** py

    def eval(self, pts, order: int = 0):
        """Reference derivatives of order ``order`` at ``pts`` (np, 2).

        Returns shape (np, nb) + (2,) * order, symmetric in the derivative axes.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.empty((len(pts), self.size) + (2,) * order)
        for idx in np.ndindex(*((2,) * order)):
            dx = idx.count(0)
            out[(Ellipsis,) + idx] = self._monomials(pts, dx, order - dx) @ self.coeffs
        return out

    def all_derivatives(self, pts, max_order: int = 3):
        return [self.eval(pts, m) for m in range(max_order + 1)]


@lru_cache(maxsize=None)
def reference_basis(k: int) -> ReferenceBasis:
    return ReferenceBasis(k)


@dataclass(frozen=True)
class DofMap:
    """Fully discontinuous layout: element ``e`` owns dofs ``e*nb .. e*nb+nb-1``."""

    n_elements: int
    k: int

    @property
    def local_size(self) -> int:
        return (self.k + 1) * (self.k + 2) // 2

    @property
    def n_dofs(self) -> int:
        return self.n_elements * self.local_size

    def element_dofs(self, elements) -> np.ndarray:
        elements = np.asarray(elements)
        return elements[..., None] * self.local_size + np.arange(self.local_size)


def _inv2(J):
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(np.abs(det) <= 1e-300) or np.any(det <= 0.0):
        raise ValueError("singular or inverted geometry Jacobian")
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1]
    inv[..., 1, 1] = J[..., 0, 0]
    inv[..., 0, 1] = -J[..., 0, 1]
    inv[..., 1, 0] = -J[..., 1, 0]
    return inv / det[..., None, None], det


def inverse_map_derivatives(J, H=None, T=None):
    """Derivatives of the inverse geometry map at matched points.

    ``J[a, b] = d psi_a / d xhat_b``, ``H[a, b, c]`` and ``T[a, b, c, d]`` are the
    second and third derivatives of the forward map (leading batch axes allowed).
    Returns ``(K, G2, G3)`` with ``K = J^{-1}``, ``G2[b, i, j]`` and
    ``G3[b, i, j, k]`` derivatives of ``xhat_b`` with respect to physical ``x``.
    """
    J = np.asarray(J, dtype=float)
    K, _ = _inv2(J)
    if H is None:
        return K, None, None
    H = np.asarray(H, dtype=float)
    # J G2 = -H[K, K]
    rhs2 = np.einsum("...acd,...ci,...dj->...aij", H, K, K)
    G2 = -np.einsum("...ba,...aij->...bij", K, rhs2)
    # T = None means a quadratic forward map; G3 still picks up H terms
    HK_G2 = np.einsum("...abc,...bi,...cjk->...aijk", H, K, G2)
    nd = HK_G2.ndim
    rhs3 = HK_G2 + HK_G2.transpose(*range(nd - 3), nd - 2, nd - 3, nd - 1) + np.moveaxis(HK_G2, -3, -1)
    if T is not None:
        T = np.asarray(T, dtype=float)
        rhs3 = rhs3 + np.einsum("...abcd,...bi,...cj,...dk->...aijk", T, K, K, K, optimize=True)
    G3 = -np.einsum("...ba,...aijk->...bijk", K, rhs3)
    return K, G2, G3


def transport_derivatives(ref, K, G2=None, G3=None, max_order: int = 3):
    """Chain rule from reference basis derivatives to physical ones.

    ``ref`` is ``[values, d1, d2, d3]`` with shapes (q, i, ...); ``K``, ``G2``,
    ``G3`` have a leading (e, q) batch. ``G2``/``G3`` may be ``None`` for affine
    maps. Returns the list ``[values, grad, hess, third]`` truncated to
    ``max_order`` with (e, q, i, ...) shapes.
    """
    v0 = ref[0]
    ne = K.shape[0]
    out = [np.broadcast_to(v0, (ne,) + v0.shape)]
    if max_order >= 1:
        v1 = ref[1]
        out.append(np.einsum("qnb,eqbi->eqni", v1, K))
    if max_order >= 2:
        v2 = ref[2]
        hess = np.einsum("qnbc,eqbi,eqcj->eqnij", v2, K, K, optimize=True)
        if G2 is not None:
            hess = hess + np.einsum("qnb,eqbij->eqnij", v1, G2)
        out.append(hess)
    if max_order >= 3:
        v3 = ref[3]
        third = np.einsum("qnbcd,eqbi,eqcj,eqdk->eqnijk", v3, K, K, K, optimize=True)
        if G2 is not None:
            t = np.einsum("qnbc,eqbik,eqcj->eqnijk", v2, G2, K)
            # sum over the three ways of pairing one index with the G2 factor
            third = third + t + np.einsum("qnbc,eqbi,eqcjk->eqnijk", v2, K, G2)
            third = third + np.einsum("qnbc,eqck,eqbij->eqnijk", v2, K, G2)
        if G3 is not None:
            third = third + np.einsum("qnb,eqbijk->eqnijk", v1, G3)
        out.append(third)
    return out


def element_shapes(mesh, elements, ref_points, k: int, max_order: int = 3):
    """Physical basis derivatives for a batch of elements at shared reference points.

    Returns ``(shapes, geo)`` where ``shapes`` is ``[values, grad, hess, third]``
    and ``geo`` the geometry dict from :meth:`Mesh.geometry`.
    """
    basis = reference_basis(k)
    ref = basis.all_derivatives(ref_points, max_order)
    geo = mesh.geometry(elements, ref_points, order=max(max_order, 1))
    K, G2, G3 = inverse_map_derivatives(geo["J"], geo.get("H"), geo.get("T"))
    return transport_derivatives(ref, K, G2, G3, max_order), geo


def physical_shape(mesh, element: int, ref_point, k: int):
    """Value, gradient, Hessian and third derivative of every basis function at one point."""
    shapes, _ = element_shapes(mesh, np.array([element]), np.atleast_2d(ref_point), k)
    return {
        "value": shapes[0][0, 0],
        "gradient": shapes[1][0, 0],
        "hessian": shapes[2][0, 0],
        "third": shapes[3][0, 0],
    }


@dataclass
class SolutionField:
    """Coefficient vector of a discontinuous field on a mesh."""

    mesh: object
    k: int
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        dofmap = DofMap(self.mesh.n_elements, self.k)
        if self.coefficients.shape != (dofmap.n_dofs,):
            raise ValueError(
                f"coefficient array has shape {self.coefficients.shape}, expected ({dofmap.n_dofs},)"
            )
        self.dofmap = dofmap

    def element_coefficients(self) -> np.ndarray:
        return self.coefficients.reshape(self.mesh.n_elements, -1)

    def __call__(self, element: int, ref_point):
        return evaluate_field(self, element, ref_point)


def evaluate_field(solution: SolutionField, element: int, ref_point):
    """Value, gradient and Hessian of ``solution`` inside ``element``."""
    shape = physical_shape(solution.mesh, element, ref_point, solution.k)
    c = solution.element_coefficients()[element]
    return {
        "value": float(c @ shape["value"]),
        "gradient": c @ shape["gradient"],
        "hessian": np.einsum("n,nij->ij", c, shape["hessian"]),
    }


def interpolate(mesh, k: int, func) -> SolutionField:
    """Induced Lagrange interpolant: nodal values of ``func`` at mapped reference nodes.

    ``func`` takes an (N, 2) array of points and returns (N,) values.
    """
    basis = reference_basis(k)
    elements = np.arange(mesh.n_elements)
    geo = mesh.geometry(elements, basis.nodes, order=0)
    pts = geo["point"].reshape(-1, 2)
    values = np.asarray(func(pts), dtype=float).reshape(mesh.n_elements, basis.size)
    return SolutionField(mesh, k, values.ravel())
