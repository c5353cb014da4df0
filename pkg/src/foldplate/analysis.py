"""dG norms, energy densities and extrapolated convergence tables."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .assembly import assemble_norm_matrix, edge_traces
from .mesh import EdgeClass
from .quadrature import edge_rule, triangle_rule
from .spaces import SolutionField, element_shapes

__all__ = [
    "ConvergenceRow",
    "ExtrapolationError",
    "dg_norm",
    "dg_error",
    "energy_density",
    "extrapolate",
    "error_series",
    "write_convergence_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("level", "ndofs", "hmax", "s", "stilde", "err", "rate")


class ExtrapolationError(ArithmeticError):
    """The sequence is already converged or not geometric."""


def dg_norm(solution: SolutionField, gamma0: float = 10.0, gamma1: float = 10.0) -> float:
    """dG norm with homogeneous boundary convention (boundary jump = trace)."""
    N = assemble_norm_matrix(solution.mesh, solution.k, gamma0, gamma1)
    c = solution.coefficients
    return math.sqrt(max(float(c @ (N @ c)), 0.0))


def dg_error(solution: SolutionField, exact, gamma0: float = 10.0, gamma1: float = 10.0) -> float:
    """Directly computed ``||u - u_h||_dG`` for a known smooth ``u``.

    ``exact`` provides callables ``value``, ``gradient`` and ``hessian`` on
    (N, 2) arrays returning (N,), (N, 2) and (N, 2, 2). The exact solution is
    assumed continuous with continuous gradient away from the fold.
    """
    mesh, k = solution.mesh, solution.k
    coef = solution.element_coefficients()
    rule = triangle_rule(2 * k + 2)
    total = 0.0
    for start in range(0, mesh.n_elements, 4096):
        el = np.arange(start, min(start + 4096, mesh.n_elements))
        sh, geo = element_shapes(mesh, el, rule.points, k, max_order=2)
        J = geo["J"]
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        hu = np.einsum("en,eqnij->eqij", coef[el], sh[2])
        he = exact["hessian"](geo["point"].reshape(-1, 2)).reshape(hu.shape)
        total += float(np.sum(det * rule.weights * np.sum((he - hu) ** 2, axis=(-1, -2))))
    erule = edge_rule(k + 3)
    for cls in (EdgeClass.INTERIOR, EdgeClass.INTERFACE, EdgeClass.DIRICHLET):
        edges = mesh.edges_of_class(cls)
        if not len(edges):
            continue
        sh_p, geo = edge_traces(mesh, edges, k, erule, "plus", max_order=1)
        ds, h = geo["ds"], mesh.penalty_length[edges]
        up = np.einsum("en,eqn->eq", coef[mesh.edge_plus[edges]], sh_p[0])
        gp = np.einsum("en,eqni->eqi", coef[mesh.edge_plus[edges]], sh_p[1])
        if cls is EdgeClass.DIRICHLET:
            pts = geo["point"].reshape(-1, 2)
            jv = exact["value"](pts).reshape(up.shape) - up
            jg = exact["gradient"](pts).reshape(gp.shape) - gp
        else:
            sh_m, _ = edge_traces(mesh, edges, k, erule, "minus", max_order=1)
            jv = np.einsum("en,eqn->eq", coef[mesh.edge_minus[edges]], sh_m[0]) - up
            jg = np.einsum("en,eqni->eqi", coef[mesh.edge_minus[edges]], sh_m[1]) - gp
        total += gamma0 * float(np.sum(h[:, None] ** -3.0 * ds * jv**2))
        if cls is not EdgeClass.INTERFACE:
            total += gamma1 * float(np.sum(h[:, None] ** -1.0 * ds * np.sum(jg**2, axis=-1)))
    return math.sqrt(total)


def energy_density(solution: SolutionField) -> np.ndarray:
    """Per-element bending energy ``0.5 * int_T |D2 u|^2`` divided by the element area."""
    mesh, k = solution.mesh, solution.k
    coef = solution.element_coefficients()
    rule = triangle_rule(2 * k + 2)
    out = np.empty(mesh.n_elements)
    for start in range(0, mesh.n_elements, 4096):
        el = np.arange(start, min(start + 4096, mesh.n_elements))
        sh, geo = element_shapes(mesh, el, rule.points, k, max_order=2)
        J = geo["J"]
        w = (J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]) * rule.weights
        hu = np.einsum("en,eqnij->eqij", coef[el], sh[2])
        energy = 0.5 * np.sum(w * np.sum(hu**2, axis=(-1, -2)), axis=1)
        out[el] = energy / w.sum(axis=1)
    return out


def extrapolate(s0: float, s1: float, s2: float) -> float:
    """Aitken delta-squared limit of ``s0, s1, s2`` (oldest first)."""
    denom = s2 - 2.0 * s1 + s0
    if abs(denom) <= 1e-14 * abs(s2):
        raise ExtrapolationError("vanishing second difference: sequence converged or not geometric")
    return (s2 * s0 - s1 * s1) / denom


@dataclass
class ConvergenceRow:
    level: int
    n_dofs: int | None
    h_max: float | None
    s: float
    s_tilde: float | None = None
    err: float | None = None
    rate: float | None = None
    flag: str = ""

    def as_dict(self):
        return {
            "level": self.level,
            "ndofs": self.n_dofs,
            "hmax": self.h_max,
            "s": self.s,
            "stilde": self.s_tilde,
            "err": self.err,
            "rate": self.rate,
        }


def error_series(norms, n_dofs=None, h_max=None, estimate_error: bool = True) -> list[ConvergenceRow]:
    """Extrapolated limit, error estimates and per-level rates from dG norms.

    The limit uses the three finest levels; ``err_j = sqrt(|s~^2 - s_j^2|)`` and
    ``rate_j = log2(err_{j-1} / err_j)``. Undefined rates are NaN with a flag.
    """
    norms = [float(s) for s in norms]
    if len(norms) < 3:
        raise ValueError("need at least three levels")
    n = len(norms)
    rows = [
        ConvergenceRow(j, None if n_dofs is None else int(n_dofs[j]), None if h_max is None else float(h_max[j]), s)
        for j, s in enumerate(norms)
    ]
    for j in range(2, n):
        try:
            rows[j].s_tilde = extrapolate(norms[j - 2], norms[j - 1], norms[j])
        except ExtrapolationError:
            rows[j].s_tilde = math.nan
            rows[j].flag = "stilde undefined"
    if not estimate_error:
        return rows
    limit = extrapolate(norms[-3], norms[-2], norms[-1])
    for row in rows:
        row.err = math.sqrt(abs(limit * limit - row.s * row.s))
    for prev, row in zip(rows, rows[1:]):
        if prev.err > 0 and row.err > 0:
            row.rate = math.log2(prev.err / row.err)
        else:
            row.rate = math.nan
            row.flag = (row.flag + "; " if row.flag else "") + "rate undefined (zero error)"
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def write_convergence_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            d = row.as_dict()
            writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
