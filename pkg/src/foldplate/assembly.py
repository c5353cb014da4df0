"""Symmetric interior penalty system for the folding plate.

Jump and average conventions: on an edge with unit normal ``n`` pointing out of
the plus element into the minus element, the jump is ``[v] = v_minus - v_plus``
and the average ``{v} = (v_plus + v_minus) / 2``. On Dirichlet edges the
missing minus trace is zero, so ``[v] = -v`` and ``{v} = v``. With these signs
the edge terms read

    <{D2u n}, [grad v]> + <{D2v n}, [grad u]>      (not on the fold)
  - <{d_n lap u}, [v]> - <{d_n lap v}, [u]>
  + g1/h <[grad u], [grad v]>                       (not on the fold)
  + g0/h^3 <[u], [v]>

and free boundary edges contribute nothing.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.io
import scipy.sparse as sp

from .mesh import DirichletSpec, EdgeClass, Mesh, MeshError, classify_edges
from .quadrature import REFERENCE_EDGE_NORMALS, _nanson, edge_rule, reference_edge_points, triangle_rule
from .spaces import DofMap, element_shapes, reference_basis

__all__ = [
    "ProblemSpec",
    "SparseSystem",
    "assemble",
    "assemble_norm_matrix",
    "apply_point_constraint",
    "point_basis_values",
    "edge_traces",
    "write_matrix_market",
]

log = logging.getLogger(__name__)

CHUNK = 4096


@dataclass
class ProblemSpec:
    """Data of one plate problem.

    ``f`` is a constant or a callable on (N, 2) points. ``g`` returns Dirichlet
    values (N,) and ``phi`` Dirichlet gradients (N, 2); ``None`` means zero.
    """

    k: int = 2
    gamma0: float = 10.0
    gamma1: float = 10.0
    f: float | Callable = 0.0
    dirichlet: DirichletSpec | str | None = None
    g: Callable | None = None
    phi: Callable | None = None
    point_constraint: tuple | None = None

    def __post_init__(self):
        if self.gamma0 <= 0 or self.gamma1 < 0:
            raise ValueError("penalty parameters must be positive")
        if self.k not in (2, 3):
            raise ValueError(f"polynomial degree must be 2 or 3, got {self.k}")
        if isinstance(self.dirichlet, str):
            self.dirichlet = DirichletSpec.parse(self.dirichlet)
        if self.point_constraint is not None:
            x0, _ = self.point_constraint
            x0 = np.asarray(x0, dtype=float)
            if np.any(x0 < -1e-14) or np.any(x0 > 1 + 1e-14):
                raise ValueError(f"constraint point {x0} outside the closed unit square")


@dataclass
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    mesh: Mesh = field(repr=False)
    k: int = 2

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def element_blocks(self) -> np.ndarray:
        """Diagonal (nb x nb) blocks of the matrix, one per element."""
        nb = DofMap(self.mesh.n_elements, self.k).local_size
        ne = self.mesh.n_elements
        rows = np.repeat(np.arange(self.n), nb)
        cols = (np.arange(self.n) // nb * nb)[:, None] + np.arange(nb)
        vals = np.asarray(self.matrix[rows, cols.ravel()]).reshape(ne, nb, nb)
        return vals


def _evaluate(func, pts, shape_tail=()):
    if func is None:
        return np.zeros(pts.shape[:-1] + shape_tail)
    if np.isscalar(func):
        return np.full(pts.shape[:-1] + shape_tail, float(func))
    flat = np.asarray(func(pts.reshape(-1, 2)), dtype=float)
    return flat.reshape(pts.shape[:-1] + shape_tail)


# ---------------------------------------------------------------------------
# traces on edges


def edge_traces(mesh: Mesh, edges, k: int, rule, side: str = "plus", max_order: int = 3):
    """Physical basis derivatives of one side of ``edges`` at matched edge points.

    Edge points are generated from the plus side parameter ``t``; the minus side
    uses ``1 - t`` on its own local edge, which addresses the same physical
    points on a conforming mesh. Returns ``(shapes, geo)`` where ``geo`` holds
    ``point`` (E, q, 2), ``normal`` (E, q, 2, from plus), ``ds`` (E, q).
    """
    edges = np.asarray(edges)
    t = rule.points[:, 0]
    if side == "plus":
        elems, locs, tt = mesh.edge_plus[edges], mesh.edge_local_plus[edges], t
    else:
        elems, locs, tt = mesh.edge_minus[edges], mesh.edge_local_minus[edges], 1.0 - t
    nb = reference_basis(k).size
    E, nq = len(edges), len(t)
    shapes = [np.empty((E, nq, nb) + (2,) * m) for m in range(max_order + 1)]
    point = np.empty((E, nq, 2))
    normal = np.empty((E, nq, 2))
    ds = np.empty((E, nq))
    for le in range(3):
        sel = np.flatnonzero(locs == le)
        if not len(sel):
            continue
        ref = reference_edge_points(le, tt)
        sh, geo = element_shapes(mesh, elems[sel], ref, k, max_order)
        for m in range(max_order + 1):
            shapes[m][sel] = sh[m]
        point[sel] = geo["point"]
        if side == "plus":
            n, stretch = _nanson(geo["J"], le)
            normal[sel] = n
            ds[sel] = stretch * rule.weights
    geo = {"point": point}
    if side == "plus":
        geo["normal"] = normal
        geo["ds"] = ds
    return shapes, geo


def _normal_quantities(shapes, normal):
    """Values, gradients, D2 v . n and d_n lap v from trace shapes."""
    val, grad, hess, third = shapes
    hn = np.einsum("eqnij,eqj->eqni", hess, normal)
    lap_grad = np.einsum("eqniij->eqnj", third)
    dnlap = np.einsum("eqnj,eqj->eqn", lap_grad, normal)
    return val, grad, hn, dnlap


def _edge_terms(mesh: Mesh, edges, k: int, rule, gamma0, gamma1, with_gradient, with_consistency):
    """Local (E, m, m) edge matrices and the global dof index arrays."""
    dofmap = DofMap(mesh.n_elements, k)
    nb = dofmap.local_size
    sh_p, geo = edge_traces(mesh, edges, k, rule, "plus", 3 if with_consistency else 1)
    normal, ds = geo["normal"], geo["ds"]
    two_sided = mesh.edge_minus[edges] >= 0
    if np.any(two_sided) and not np.all(two_sided):
        raise ValueError("mixed interior and boundary edges in one batch")
    h = mesh.penalty_length[edges]
    if with_consistency:
        v_p, g_p, hn_p, l_p = _normal_quantities(sh_p, normal)
    else:
        v_p, g_p = sh_p[0], sh_p[1]
    if np.all(two_sided) and len(edges):
        sh_m, _ = edge_traces(mesh, edges, k, rule, "minus", 3 if with_consistency else 1)
        if with_consistency:
            v_m, g_m, hn_m, l_m = _normal_quantities(sh_m, normal)
        else:
            v_m, g_m = sh_m[0], sh_m[1]
        jv = np.concatenate([-v_p, v_m], axis=2)
        jg = np.concatenate([-g_p, g_m], axis=2)
        if with_consistency:
            ag = 0.5 * np.concatenate([hn_p, hn_m], axis=2)
            a3 = 0.5 * np.concatenate([l_p, l_m], axis=2)
        dofs = np.concatenate(
            [dofmap.element_dofs(mesh.edge_plus[edges]), dofmap.element_dofs(mesh.edge_minus[edges])], axis=1
        )
    else:
        jv, jg = -v_p, -g_p
        if with_consistency:
            ag, a3 = hn_p, l_p
        dofs = dofmap.element_dofs(mesh.edge_plus[edges])
    M = gamma0 * np.einsum("e,eq,eqm,eqn->emn", h**-3.0, ds, jv, jv, optimize=True)
    if with_consistency:
        D = np.einsum("eq,eqm,eqn->emn", ds, jv, a3, optimize=True)
        M -= D + D.transpose(0, 2, 1)
    if with_gradient:
        M += gamma1 * np.einsum("e,eq,eqmi,eqni->emn", h**-1.0, ds, jg, jg, optimize=True)
        if with_consistency:
            C = np.einsum("eq,eqmi,eqni->emn", ds, jg, ag, optimize=True)
            M += C + C.transpose(0, 2, 1)
    return M, dofs


def _volume_terms(mesh: Mesh, elements, k: int, rule, f=None):
    sh, geo = element_shapes(mesh, elements, rule.points, k, max_order=2)
    J = geo["J"]
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    w = det * rule.weights
    K = np.einsum("eq,eqmij,eqnij->emn", w, sh[2], sh[2], optimize=True)
    load = None
    if f is not None:
        fv = _evaluate(f, geo["point"])
        load = np.einsum("eq,eqm->em", w * fv, sh[0])
    return K, load


def _coo(blocks, dofs):
    m = dofs.shape[1]
    rows = np.repeat(dofs, m, axis=1).ravel()
    cols = np.tile(dofs, (1, m)).ravel()
    return rows, cols, blocks.ravel()


def _chunks(idx):
    for start in range(0, len(idx), CHUNK):
        yield idx[start : start + CHUNK]


def _prepare_mesh(mesh: Mesh, spec: ProblemSpec) -> Mesh:
    if spec.dirichlet is not None and mesh.dirichlet != spec.dirichlet:
        mesh = classify_edges(mesh, spec.dirichlet)
    if not mesh.is_classified:
        raise MeshError("mesh edges are not classified")
    if mesh.k_geo != spec.k:
        log.warning("geometry degree %d differs from polynomial degree %d", mesh.k_geo, spec.k)
    return mesh


def _assemble_matrix(mesh, k, gamma0, gamma1, with_consistency, f=None):
    dofmap = DofMap(mesh.n_elements, k)
    n = dofmap.n_dofs
    vrule = triangle_rule(2 * k + 2)
    erule = edge_rule(k + 3)
    rows, cols, vals = [], [], []
    load = np.zeros(n) if f is not None else None
    for chunk in _chunks(np.arange(mesh.n_elements)):
        K, lv = _volume_terms(mesh, chunk, k, vrule, f)
        d = dofmap.element_dofs(chunk)
        r, c, v = _coo(K, d)
        rows.append(r), cols.append(c), vals.append(v)
        if lv is not None:
            np.add.at(load, d.ravel(), lv.ravel())
    groups = [
        (EdgeClass.INTERIOR, True),
        (EdgeClass.DIRICHLET, True),
        (EdgeClass.INTERFACE, False),
    ]
    for cls, with_grad in groups:
        for chunk in _chunks(mesh.edges_of_class(cls)):
            M, d = _edge_terms(mesh, chunk, k, erule, gamma0, gamma1, with_grad, with_consistency)
            r, c, v = _coo(M, d)
            rows.append(r), cols.append(c), vals.append(v)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    A.sum_duplicates()
    return A, load


def _boundary_rhs(mesh: Mesh, spec: ProblemSpec, rhs: np.ndarray):
    if spec.g is None and spec.phi is None:
        return
    k = spec.k
    dofmap = DofMap(mesh.n_elements, k)
    rule = edge_rule(k + 3)
    for chunk in _chunks(mesh.edges_of_class(EdgeClass.DIRICHLET)):
        sh, geo = edge_traces(mesh, chunk, k, rule, "plus", 3)
        v, grad, hn, dnlap = _normal_quantities(sh, geo["normal"])
        ds, h = geo["ds"], mesh.penalty_length[chunk]
        g = _evaluate(spec.g, geo["point"])
        phi = _evaluate(spec.phi, geo["point"], (2,))
        local = (
            -np.einsum("eq,eqni,eqi->en", ds, hn, phi)
            + np.einsum("eq,eqn,eq->en", ds, dnlap, g)
            + spec.gamma1 * np.einsum("e,eq,eqni,eqi->en", 1.0 / h, ds, grad, phi)
            + spec.gamma0 * np.einsum("e,eq,eqn,eq->en", h**-3.0, ds, v, g)
        )
        np.add.at(rhs, dofmap.element_dofs(mesh.edge_plus[chunk]).ravel(), local.ravel())


def assemble(mesh: Mesh, spec: ProblemSpec) -> SparseSystem:
    """Assemble the interior penalty matrix and load vector."""
    mesh = _prepare_mesh(mesh, spec)
    A, rhs = _assemble_matrix(mesh, spec.k, spec.gamma0, spec.gamma1, True, f=spec.f)
    _boundary_rhs(mesh, spec, rhs)
    system = SparseSystem(A, rhs, mesh, spec.k)
    if spec.point_constraint is not None:
        x0, value = spec.point_constraint
        system = apply_point_constraint(system, x0, value)
    return system


def assemble_norm_matrix(mesh: Mesh, k: int, gamma0: float = 10.0, gamma1: float = 10.0) -> sp.csr_matrix:
    """Gram matrix of the squared dG norm (broken Hessian plus jump penalties)."""
    if not mesh.is_classified:
        raise MeshError("mesh edges are not classified")
    key = ("norm", k, float(gamma0), float(gamma1))
    if key not in mesh._cache:
        mesh._cache[key] = _assemble_matrix(mesh, k, gamma0, gamma1, False)[0]
    return mesh._cache[key]


def point_basis_values(mesh: Mesh, k: int, point):
    """Element containing ``point``, its global dofs and basis values there."""
    element, ref = mesh.locate(point)
    sh, _ = element_shapes(mesh, np.array([element]), ref[None], k, max_order=0)
    dofs = DofMap(mesh.n_elements, k).element_dofs(element)
    return element, dofs, sh[0][0, 0]


def apply_point_constraint(system: SparseSystem, x0, value: float, beta_scale: float = 1e8) -> SparseSystem:
    """Enforce ``u(x0) = value`` with a symmetric penalty of size ``beta_scale * max diag``."""
    _, dofs, phi = point_basis_values(system.mesh, system.k, x0)
    beta = beta_scale * system.matrix.diagonal().max()
    n = system.n
    rows = np.repeat(dofs, len(dofs))
    cols = np.tile(dofs, len(dofs))
    P = sp.coo_matrix((beta * np.outer(phi, phi).ravel(), (rows, cols)), shape=(n, n))
    A = (system.matrix + P).tocsr()
    rhs = system.rhs.copy()
    rhs[dofs] += beta * value * phi
    return SparseSystem(A, rhs, system.mesh, system.k)


def write_matrix_market(system: SparseSystem, path) -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(system.matrix), symmetry="symmetric")
