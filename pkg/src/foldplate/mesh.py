"""Structured, interface-fitted isoparametric triangulations of the unit square.

A mesh is built from an ``n x n`` grid whose squares are cut along the diagonal
from lower-left to upper-right. When a fold is requested, the grid column
closest to the mean abscissa of the fold curve is moved horizontally onto the
curve and its vertical edges become the interface chain. Only elements with an
edge on the fold carry a curved geometry map; every other element is affine.

Meshes are immutable once built. :func:`refine_uniform` returns a new mesh.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .quadrature import REFERENCE_EDGE_TANGENTS, edge_rule, reference_edge_points
from .spaces import lagrange_nodes, reference_basis

__all__ = [
    "EdgeClass",
    "InterfaceKind",
    "InterfaceSpec",
    "DirichletSpec",
    "Mesh",
    "MeshError",
    "build_structured_mesh",
    "mesh_from_triangles",
    "refine_uniform",
    "classify_edges",
]

log = logging.getLogger(__name__)

GEOM_TOL = 1e-12


class MeshError(ValueError):
    """Invalid mesh input or degenerate geometry."""


class EdgeClass(enum.IntEnum):
    UNCLASSIFIED = -1
    INTERIOR = 0
    INTERFACE = 1
    DIRICHLET = 2
    FREE = 3


class InterfaceKind(str, enum.Enum):
    NONE = "none"
    STRAIGHT_X05 = "straight"
    QUADRATIC = "quadratic"
    SINE = "sine"


@dataclass(frozen=True)
class InterfaceSpec:
    """Fold curve ``x = curve(y)`` and the polynomial order used to fit it."""

    kind: InterfaceKind = InterfaceKind.NONE
    fit_order: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", InterfaceKind(self.kind))
        if self.fit_order not in (1, 2):
            raise MeshError(f"fit order must be 1 or 2, got {self.fit_order}")

    def curve_x(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind is InterfaceKind.STRAIGHT_X05:
            return np.full_like(y, 0.5)
        if self.kind is InterfaceKind.QUADRATIC:
            return 2.0 / 3.0 - 2.0 / 3.0 * (y - y * y)
        if self.kind is InterfaceKind.SINE:
            return 2.0 / 3.0 - np.sin(np.pi * y) / 6.0
        raise MeshError("no interface curve")

    def curve_dx(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind is InterfaceKind.STRAIGHT_X05:
            return np.zeros_like(y)
        if self.kind is InterfaceKind.QUADRATIC:
            return -2.0 / 3.0 * (1.0 - 2.0 * y)
        if self.kind is InterfaceKind.SINE:
            return -np.pi * np.cos(np.pi * y) / 6.0
        raise MeshError("no interface curve")

    @property
    def mean_x(self) -> float:
        if self.kind is InterfaceKind.STRAIGHT_X05:
            return 0.5
        if self.kind is InterfaceKind.QUADRATIC:
            return 2.0 / 3.0 - 1.0 / 9.0
        if self.kind is InterfaceKind.SINE:
            return 2.0 / 3.0 - 1.0 / (3.0 * np.pi)
        raise MeshError("no interface curve")

    @property
    def curved_nodes(self) -> bool:
        """Whether interface edge nodes are placed on the curve (vs. on the chord)."""
        if self.kind in (InterfaceKind.NONE, InterfaceKind.STRAIGHT_X05):
            return False
        return self.fit_order == 2 or self.kind is InterfaceKind.QUADRATIC


_SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class DirichletSpec:
    """Union of closed boundary segments ``(side, lo, hi)``.

    ``side`` is one of ``left`` (x=0), ``right`` (x=1), ``bottom`` (y=0),
    ``top`` (y=1); ``lo``/``hi`` bound the running coordinate along the side.
    """

    segments: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "DirichletSpec":
        """Parse ``all``, ``none``, ``left+right``, ``x>=2/3`` or ``side[lo:hi]`` terms."""
        text = text.strip().lower()
        if text in ("", "none"):
            return cls(())
        segments = []
        for term in text.split("+"):
            term = term.strip()
            if term == "all":
                segments += [(s, 0.0, 1.0) for s in _SIDES]
            elif term in _SIDES:
                segments.append((term, 0.0, 1.0))
            elif term.startswith("x>="):
                x0 = _parse_number(term[3:])
                segments += [("bottom", x0, 1.0), ("top", x0, 1.0), ("right", 0.0, 1.0)]
            elif term.startswith("x<="):
                x0 = _parse_number(term[3:])
                segments += [("bottom", 0.0, x0), ("top", 0.0, x0), ("left", 0.0, 1.0)]
            elif "[" in term and term.endswith("]"):
                side, rng = term[:-1].split("[")
                lo, hi = (_parse_number(v) for v in rng.split(":"))
                if side not in _SIDES:
                    raise MeshError(f"unknown boundary side {side!r}")
                segments.append((side, lo, hi))
            else:
                raise MeshError(f"cannot parse Dirichlet boundary term {term!r}")
        return cls(tuple(segments))

    @classmethod
    def all(cls) -> "DirichletSpec":
        return cls.parse("all")


def _parse_number(text: str) -> float:
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def _side_of(p, q):
    if abs(p[0]) < GEOM_TOL and abs(q[0]) < GEOM_TOL:
        return "left", p[1], q[1]
    if abs(p[0] - 1) < GEOM_TOL and abs(q[0] - 1) < GEOM_TOL:
        return "right", p[1], q[1]
    if abs(p[1]) < GEOM_TOL and abs(q[1]) < GEOM_TOL:
        return "bottom", p[0], q[0]
    if abs(p[1] - 1) < GEOM_TOL and abs(q[1] - 1) < GEOM_TOL:
        return "top", p[0], q[0]
    raise MeshError(f"boundary edge {p}-{q} does not lie on a side of the unit square")


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming curved triangulation with edge connectivity.

    Geometry nodes are stored globally in ``nodes``; the first ``n_vertices``
    are the triangle vertices. ``element_nodes[e]`` lists node ids in reference
    Lagrange order. Edge ``s`` has neighbours ``edge_plus[s]`` and
    ``edge_minus[s]`` (``-1`` on the boundary), with local edge numbers
    ``edge_local_plus``/``edge_local_minus``. The unit normal of an edge points
    out of its plus element. ``edge_length`` is the arclength of each edge;
    ``penalty_length`` is the local mesh size used to scale jump penalties,
    the smaller :meth:`element_sizes` value of the neighbouring elements.
    """

    nodes: np.ndarray
    n_vertices: int
    elements: np.ndarray
    element_nodes: np.ndarray
    curved: np.ndarray
    edge_vertices: np.ndarray
    edge_plus: np.ndarray
    edge_minus: np.ndarray
    edge_local_plus: np.ndarray
    edge_local_minus: np.ndarray
    edge_on_interface: np.ndarray
    edge_class: np.ndarray
    edge_length: np.ndarray
    penalty_length: np.ndarray
    interface: InterfaceSpec
    k_geo: int
    level: int = 0
    grid_n: int = 0
    dirichlet: DirichletSpec | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def vertices(self) -> np.ndarray:
        return self.nodes[: self.n_vertices]

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_edges(self) -> int:
        return len(self.edge_vertices)

    @property
    def is_classified(self) -> bool:
        return bool(np.all(self.edge_class >= 0))

    def edges_of_class(self, *classes) -> np.ndarray:
        return np.flatnonzero(np.isin(self.edge_class, [int(c) for c in classes]))

    def element_coordinates(self, elements=None) -> np.ndarray:
        if elements is None:
            return self.nodes[self.element_nodes]
        return self.nodes[self.element_nodes[elements]]

    # -- geometry maps ---------------------------------------------------

    def geometry(self, elements, ref_points, order: int = 1):
        """Geometry map and its derivatives for ``elements`` at shared ``ref_points``.

        Returns a dict with ``point`` (e, q, 2) and, depending on ``order``,
        ``J`` (e, q, 2, 2), ``H`` (e, q, 2, 2, 2) and ``T`` (e, q, 2, 2, 2, 2) with
        ``J[..., a, b] = d psi_a / d xhat_b``. ``H``/``T`` are omitted when every
        element in the batch is affine.
        """
        elements = np.atleast_1d(np.asarray(elements))
        ref_points = np.atleast_2d(np.asarray(ref_points, dtype=float))
        basis = reference_basis(self.k_geo)
        X = self.nodes[self.element_nodes[elements]]  # (e, g, 2)
        out = {"point": np.einsum("qg,ega->eqa", basis.eval(ref_points, 0), X)}
        if order >= 1:
            out["J"] = np.einsum("qgb,ega->eqab", basis.eval(ref_points, 1), X)
        if order >= 2 and np.any(self.curved[elements]):
            out["H"] = np.einsum("qgbc,ega->eqabc", basis.eval(ref_points, 2), X)
            if order >= 3 and self.k_geo >= 3:
                out["T"] = np.einsum("qgbcd,ega->eqabcd", basis.eval(ref_points, 3), X)
        return out

    def map_derivatives(self, element: int, ref_points, order: int = 3):
        """Geometry map of one element: point, J, and (possibly zero) D2/D3 arrays.

        Accepts a single reference point (2,) or an array (q, 2).
        """
        single = np.ndim(ref_points) == 1
        ref = np.atleast_2d(np.asarray(ref_points, dtype=float))
        if np.any(ref < -1e-14) or np.any(ref.sum(axis=1) > 1 + 1e-14):
            raise MeshError("reference point outside the reference triangle")
        basis = reference_basis(self.k_geo)
        X = self.nodes[self.element_nodes[element]]
        res = {"point": basis.eval(ref, 0) @ X}
        if order >= 1:
            res["J"] = np.einsum("qgb,ga->qab", basis.eval(ref, 1), X)
            det = np.linalg.det(res["J"])
            if np.any(det <= 0):
                raise MeshError(f"degenerate geometry in element {element}")
        if order >= 2:
            res["H"] = np.einsum("qgbc,ga->qabc", basis.eval(ref, 2), X)
        if order >= 3:
            if self.k_geo >= 3:
                res["T"] = np.einsum("qgbcd,ga->qabcd", basis.eval(ref, 3), X)
            else:
                res["T"] = np.zeros((len(ref), 2, 2, 2, 2))
        if single:
            res = {key: val[0] for key, val in res.items()}
        return res

    # -- derived quantities -----------------------------------------------

    def element_diameters(self) -> np.ndarray:
        """Diameters of the straight triangles spanned by element vertices."""
        v = self.vertices[self.elements]
        d = np.stack([np.linalg.norm(v[:, i] - v[:, (i + 1) % 3], axis=1) for i in range(3)], axis=1)
        return d.max(axis=1)

    def element_sizes(self) -> np.ndarray:
        """Diameter, capped by twice the smallest height of the straight triangle.

        Equal to the diameter on shape-regular right isosceles elements, and
        smaller on thin ones, where inverse estimates degrade with the height.
        """
        v = self.vertices[self.elements]
        d1, d2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        diam = self.element_diameters()
        return np.minimum(diam, 4.0 * area / diam)

    def h_max(self) -> float:
        return float(self.element_diameters().max())

    def shape_regularity(self) -> np.ndarray:
        """Circumradius over inradius of each straight triangle."""
        v = self.vertices[self.elements]
        a = np.linalg.norm(v[:, 1] - v[:, 2], axis=1)
        b = np.linalg.norm(v[:, 2] - v[:, 0], axis=1)
        c = np.linalg.norm(v[:, 0] - v[:, 1], axis=1)
        d1, d2 = v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]
        area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        circ = a * b * c / (4 * area)
        inr = 2 * area / (a + b + c)
        return circ / inr

    def interface_edges(self) -> np.ndarray:
        return np.flatnonzero(self.edge_on_interface)

    def interface_chain(self) -> np.ndarray:
        """Interface edges ordered bottom to top."""
        edges = self.interface_edges()
        ymin = self.vertices[self.edge_vertices[edges]][:, :, 1].min(axis=1)
        return edges[np.argsort(ymin)]

    def edge_points(self, edges, t) -> np.ndarray:
        """Physical points of parameter values ``t`` on edges, seen from the plus side."""
        edges = np.atleast_1d(edges)
        out = np.empty((len(edges), len(np.atleast_1d(t)), 2))
        for le in range(3):
            sel = np.flatnonzero(self.edge_local_plus[edges] == le)
            if len(sel):
                ref = reference_edge_points(le, t)
                out[sel] = self.geometry(self.edge_plus[edges[sel]], ref, order=0)["point"]
        return out

    def subdomain_of_elements(self) -> np.ndarray:
        """0 for elements left of the fold, 1 right of it (all 0 without a fold)."""
        if self.interface.kind is InterfaceKind.NONE:
            return np.zeros(self.n_elements, dtype=int)
        cent = self.vertices[self.elements].mean(axis=1)
        return (cent[:, 0] > self.interface.curve_x(cent[:, 1])).astype(int)

    def locate(self, point, tol: float = 1e-10):
        """Lowest-index element containing ``point`` and the reference coordinates there."""
        point = np.asarray(point, dtype=float)
        v = self.vertices[self.elements]
        # cheap bounding-box filter, then Newton inversion of the geometry map
        lo = v.min(axis=1) - 0.5 * self.h_max()
        hi = v.max(axis=1) + 0.5 * self.h_max()
        cand = np.flatnonzero(np.all((point >= lo) & (point <= hi), axis=1))
        for e in cand:
            ref = self._invert(e, point)
            if ref is not None and ref.min() >= -tol and ref.sum() <= 1 + tol:
                return int(e), np.clip(ref, 0.0, 1.0)
        raise MeshError(f"point {point} not inside the mesh")

    def _invert(self, element, point, maxit: int = 50):
        ref = np.array([1 / 3, 1 / 3])
        basis = reference_basis(self.k_geo)
        X = self.nodes[self.element_nodes[element]]
        for _ in range(maxit):
            p = basis.eval(ref, 0)[0] @ X
            J = np.einsum("gb,ga->ab", basis.eval(ref, 1)[0], X)
            step = np.linalg.solve(J, point - p)
            ref = ref + step
            if np.linalg.norm(step) < 1e-15:
                break
            if np.abs(ref).max() > 10:
                return None
        if np.linalg.norm(basis.eval(ref, 0)[0] @ X - point) > 1e-11:
            return None
        return ref


# ---------------------------------------------------------------------------
# construction


def _grid(n):
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            v00 = j * (n + 1) + i
            v10, v01, v11 = v00 + 1, v00 + n + 1, v00 + n + 2
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return verts, np.array(tris, dtype=np.int64)


def build_structured_mesh(n: int, spec: InterfaceSpec | None = None, k_geo: int = 2) -> Mesh:
    """Structured mesh of the unit square with an optional fitted fold column."""
    spec = spec or InterfaceSpec()
    if n < 2 or n % 2:
        raise MeshError(f"grid subdivisions must be even and >= 2, got {n}")
    if k_geo not in (1, 2, 3):
        raise MeshError(f"unsupported geometry degree {k_geo}")
    verts, tris = _grid(n)
    iface_pairs = set()
    if spec.kind is not InterfaceKind.NONE:
        col = int(round(spec.mean_x * n))
        col = min(max(col, 1), n - 1)
        ids = np.arange(n + 1) * (n + 1) + col
        verts[ids, 0] = spec.curve_x(verts[ids, 1])
        iface_pairs = {(int(a), int(b)) for a, b in zip(ids[:-1], ids[1:])}
    return _assemble_mesh(verts, tris, iface_pairs, spec, k_geo, level=0, grid_n=n)


def mesh_from_triangles(vertices, triangles, k_geo: int = 2) -> Mesh:
    """Affine mesh without a fold from explicit counter-clockwise triangles."""
    verts = np.asarray(vertices, dtype=float)
    tris = np.asarray(triangles, dtype=np.int64)
    if verts.ndim != 2 or verts.shape[1] != 2 or tris.ndim != 2 or tris.shape[1] != 3:
        raise MeshError("expected (N, 2) vertices and (M, 3) triangles")
    return _assemble_mesh(verts, tris, set(), InterfaceSpec(), k_geo, level=0, grid_n=0)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Red refinement: every triangle split into four; fold vertices re-projected."""
    spec = mesh.interface
    verts = list(map(tuple, mesh.vertices))
    iface = {tuple(sorted(p)) for p in mesh.edge_vertices[mesh.edge_on_interface].tolist()}
    midpoint = {}
    for s, (a, b) in enumerate(mesh.edge_vertices.tolist()):
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        m = 0.5 * (pa + pb)
        if mesh.edge_on_interface[s]:
            m[0] = spec.curve_x(m[1])
        midpoint[(a, b)] = len(verts)
        verts.append(tuple(m))
    new_iface = set()
    for a, b in iface:
        m = midpoint[(a, b)]
        new_iface.add((min(a, m), max(a, m)))
        new_iface.add((min(b, m), max(b, m)))

    def mid(a, b):
        return midpoint[(min(a, b), max(a, b))]

    tris = []
    for v0, v1, v2 in mesh.elements.tolist():
        m01, m12, m20 = mid(v0, v1), mid(v1, v2), mid(v2, v0)
        tris += [(v0, m01, m20), (m01, v1, m12), (m20, m12, v2), (m01, m12, m20)]
    child = _assemble_mesh(
        np.array(verts), np.array(tris, dtype=np.int64), new_iface, spec, mesh.k_geo,
        level=mesh.level + 1, grid_n=2 * mesh.grid_n,
    )
    if mesh.dirichlet is not None:
        child = classify_edges(child, mesh.dirichlet)
    return child


def _assemble_mesh(verts, tris, iface_pairs, spec, k_geo, level, grid_n) -> Mesh:
    nv = len(verts)
    ne = len(tris)
    local = np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1)  # (ne, 3, 2)
    keys = np.sort(local, axis=2).reshape(-1, 2)
    edge_vertices, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    n_edges = len(edge_vertices)
    counts = np.bincount(inverse, minlength=n_edges)
    if counts.max() > 2:
        raise MeshError("non-manifold edge")
    order = np.argsort(inverse, kind="stable")
    first = np.full(n_edges, -1)
    second = np.full(n_edges, -1)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    first[:] = order[starts]
    two = counts == 2
    second[two] = order[starts[two] + 1]
    plus = first // 3
    lplus = first % 3
    minus = np.where(two, second // 3, -1)
    lminus = np.where(two, second % 3, -1)

    on_iface = np.array([(int(a), int(b)) in iface_pairs for a, b in edge_vertices], dtype=bool)
    if np.any(on_iface & ~two):
        raise MeshError("interface edge on the boundary")
    # interface normals point from the left subdomain into the right one
    if np.any(on_iface):
        cent = verts[tris].mean(axis=1)
        s = np.flatnonzero(on_iface)
        emid = verts[edge_vertices[s]].mean(axis=1)
        swap = cent[plus[s], 0] > emid[:, 0]
        ss = s[swap]
        plus[ss], minus[ss] = minus[ss].copy(), plus[ss].copy()
        lplus[ss], lminus[ss] = lminus[ss].copy(), lplus[ss].copy()

    # geometry nodes: vertices, k-1 per edge (from lower to higher vertex id), interior
    k = k_geo
    curved_edge = on_iface & spec.curved_nodes if k >= 2 else np.zeros(n_edges, bool)
    nodes = [verts]
    if k >= 2:
        t = np.arange(1, k) / k
        pa, pb = verts[edge_vertices[:, 0]], verts[edge_vertices[:, 1]]
        enodes = pa[:, None, :] + t[None, :, None] * (pb - pa)[:, None, :]
        if np.any(curved_edge):
            ce = np.flatnonzero(curved_edge)
            ynew = enodes[ce, :, 1]
            enodes[ce, :, 0] = spec.curve_x(ynew)
        nodes.append(enodes.reshape(-1, 2))
    ref_nodes = lagrange_nodes(k)
    n_geo = len(ref_nodes)
    element_nodes = np.empty((ne, n_geo), dtype=np.int64)
    element_nodes[:, :3] = tris
    edge_of = inverse.reshape(ne, 3)
    if k >= 2:
        for le in range(3):
            s = edge_of[:, le]
            forward = tris[:, le] == edge_vertices[s, 0]
            for i in range(k - 1):
                idx = np.where(forward, i, k - 2 - i)
                element_nodes[:, 3 + le * (k - 1) + i] = nv + s * (k - 1) + idx
    if k >= 3:
        # interior node reproducing quadratics: sum(edge nodes)/4 - sum(vertices)/6
        allnodes = np.concatenate(nodes)
        en = allnodes[element_nodes[:, 3 : 3 + 3 * (k - 1)]].sum(axis=1)
        vs = verts[tris].sum(axis=1)
        face = en / 4.0 - vs / 6.0
        element_nodes[:, -1] = len(allnodes) + np.arange(ne)
        nodes.append(face)
    nodes = np.concatenate(nodes)
    curved = np.zeros(ne, dtype=bool)
    if np.any(curved_edge):
        curved[np.unique(np.concatenate([plus[curved_edge], minus[curved_edge]]))] = True

    mesh = Mesh(
        nodes=nodes,
        n_vertices=nv,
        elements=tris,
        element_nodes=element_nodes,
        curved=curved,
        edge_vertices=edge_vertices,
        edge_plus=plus,
        edge_minus=minus,
        edge_local_plus=lplus,
        edge_local_minus=lminus,
        edge_on_interface=on_iface,
        edge_class=np.full(n_edges, int(EdgeClass.UNCLASSIFIED)),
        edge_length=np.zeros(n_edges),
        penalty_length=np.zeros(n_edges),
        interface=spec,
        k_geo=k,
        level=level,
        grid_n=grid_n,
    )
    _check_orientation(mesh)
    return replace(mesh, edge_length=_edge_lengths(mesh), penalty_length=_penalty_lengths(mesh), _cache={})


def _check_orientation(mesh: Mesh):
    from .quadrature import triangle_rule

    rule = triangle_rule(2 * mesh.k_geo + 2)
    pts = np.concatenate([rule.points, lagrange_nodes(mesh.k_geo)])
    J = mesh.geometry(np.arange(mesh.n_elements), pts, order=1)["J"]
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    bad = np.flatnonzero(det.min(axis=1) <= 0)
    if len(bad):
        raise MeshError(f"inverted elements (non-positive Jacobian): {bad[:10].tolist()}")


def _edge_lengths(mesh: Mesh) -> np.ndarray:
    rule = edge_rule(mesh.k_geo + 3)
    out = np.empty(mesh.n_edges)
    for le in range(3):
        sel = np.flatnonzero(mesh.edge_local_plus == le)
        ref = reference_edge_points(le, rule.points[:, 0])
        J = mesh.geometry(mesh.edge_plus[sel], ref, order=1)["J"]
        stretch = np.linalg.norm(J @ REFERENCE_EDGE_TANGENTS[le], axis=-1)
        out[sel] = stretch @ rule.weights
    return out


def _penalty_lengths(mesh: Mesh) -> np.ndarray:
    # the smaller neighbour keeps the penalty above both inverse-estimate constants
    size = mesh.element_sizes()
    h = size[mesh.edge_plus].copy()
    two = mesh.edge_minus >= 0
    h[two] = np.minimum(h[two], size[mesh.edge_minus[two]])
    return h


def classify_edges(mesh: Mesh, dirichlet: DirichletSpec | str) -> Mesh:
    """Tag every edge INTERIOR, INTERFACE, DIRICHLET or FREE."""
    if isinstance(dirichlet, str):
        dirichlet = DirichletSpec.parse(dirichlet)
    cls = np.full(mesh.n_edges, int(EdgeClass.INTERIOR))
    cls[mesh.edge_on_interface] = int(EdgeClass.INTERFACE)
    boundary = np.flatnonzero(mesh.edge_minus < 0)
    verts = mesh.vertices
    for s in boundary:
        a, b = mesh.edge_vertices[s]
        side, u, w = _side_of(verts[a], verts[b])
        lo, hi = min(u, w), max(u, w)
        inside = False
        for seg_side, slo, shi in dirichlet.segments:
            if seg_side != side:
                continue
            if lo >= slo - GEOM_TOL and hi <= shi + GEOM_TOL:
                inside = True
                break
            if lo < shi - GEOM_TOL and hi > slo + GEOM_TOL:
                raise MeshError(
                    f"Dirichlet segment {seg_side}[{slo:g}:{shi:g}] splits boundary edge "
                    f"[{lo:g}, {hi:g}] on side {side}"
                )
        cls[s] = int(EdgeClass.DIRICHLET if inside else EdgeClass.FREE)
    out = replace(mesh, edge_class=cls, dirichlet=dirichlet, _cache={})
    _check_subdomain_support(out)
    return out


def _check_subdomain_support(mesh: Mesh):
    dir_edges = mesh.edges_of_class(EdgeClass.DIRICHLET)
    sub = mesh.subdomain_of_elements()
    owners = set(sub[mesh.edge_plus[dir_edges]].tolist())
    n_sub = 2 if mesh.interface.kind is not InterfaceKind.NONE else 1
    missing = [i for i in range(n_sub) if i not in owners]
    if missing:
        log.warning("subdomain(s) %s have no Dirichlet edge; the dG norm is only a seminorm there", missing)
