"""Solvers for the symmetric positive definite penalty system."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "SolveReport",
    "SolverError",
    "IndefiniteSystemError",
    "ConvergenceError",
    "solve_cg",
    "solve_direct",
    "solve",
    "DIRECT_LIMIT",
]

DIRECT_LIMIT = 200_000


class SolverError(RuntimeError):
    """Numerical failure while solving."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IndefiniteSystemError(SolverError):
    """Non-positive curvature or pivot: the penalty parameters are too small."""


class ConvergenceError(SolverError):
    pass


@dataclass
class SolveReport:
    method: str
    iterations: int
    residual: float
    wall_time: float

    def as_dict(self):
        return {
            "method": self.method,
            "iterations": self.iterations,
            "residual": self.residual,
            "wall_time": self.wall_time,
        }


def _unpack(system):
    if hasattr(system, "matrix"):
        return sp.csr_matrix(system.matrix), np.asarray(system.rhs, dtype=float)
    A, b = system
    return sp.csr_matrix(A), np.asarray(b, dtype=float)


def relative_residual(A, x, b) -> float:
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - A @ x)
    return float(r / nb) if nb > 0 else float(r)


def _block_jacobi(A, block_size):
    n = A.shape[0]
    if block_size is None or n % block_size:
        block_size = 1
    nblk = n // block_size
    rows = np.repeat(np.arange(n), block_size)
    cols = ((np.arange(n) // block_size) * block_size)[:, None] + np.arange(block_size)
    blocks = np.asarray(A[rows, cols.ravel()]).reshape(nblk, block_size, block_size)
    # a diagonal block of an SPD matrix is SPD, so a failed Cholesky proves indefiniteness
    try:
        np.linalg.cholesky(blocks)
    except np.linalg.LinAlgError as exc:
        raise IndefiniteSystemError("diagonal block is not positive definite: the penalty is too small") from exc
    inv = np.linalg.inv(blocks)

    def apply(r):
        return np.einsum("bij,bj->bi", inv, r.reshape(nblk, block_size)).ravel()

    return apply


def solve_cg(system, tol: float = 1e-10, max_iter: int | None = None, block_size: int | None = None, x0=None):
    """Preconditioned conjugate gradients with an element-block Jacobi preconditioner.

    ``system`` is a :class:`SparseSystem` or an ``(A, b)`` pair. The block size
    defaults to the element dof count of a :class:`SparseSystem`.
    Returns ``(x, report)``.
    """
    A, b = _unpack(system)
    n = A.shape[0]
    if not np.all(np.isfinite(b)):
        raise SolverError("right-hand side is not finite")
    if block_size is None and hasattr(system, "k"):
        block_size = (system.k + 1) * (system.k + 2) // 2
    if max_iter is None:
        max_iter = int(50 * np.sqrt(n) + 1000)
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        x[:] = 0.0
        return x, SolveReport("cg", 0, 0.0, time.perf_counter() - t0)
    prec = _block_jacobi(A, block_size)
    r = b - A @ x
    z = prec(r)
    p = z.copy()
    rz = r @ z
    it = 0
    last_restart = np.inf
    while True:
        if np.linalg.norm(r) <= tol * bnorm:
            res = relative_residual(A, x, b)
            if res <= tol:
                break
            if res > 0.5 * last_restart:
                # the true residual has hit its rounding floor (|A||x| >> |b|)
                report = SolveReport("cg", it, res, time.perf_counter() - t0)
                raise ConvergenceError(f"CG stagnated at relative residual {res:.2e} > tol {tol:.1e}", report)
            last_restart = res
            r = b - A @ x  # restart from the true residual
            z = prec(r)
            p = z.copy()
            rz = r @ z
        if it >= max_iter:
            report = SolveReport("cg", it, relative_residual(A, x, b), time.perf_counter() - t0)
            raise ConvergenceError(f"CG did not converge in {max_iter} iterations", report)
        Ap = A @ p
        curv = p @ Ap
        if curv <= 0.0:
            report = SolveReport("cg", it, relative_residual(A, x, b), time.perf_counter() - t0)
            raise IndefiniteSystemError(
                "negative curvature in CG: the system is not positive definite (penalty too small?)", report
            )
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Ap
        z = prec(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, SolveReport("cg", it, relative_residual(A, x, b), time.perf_counter() - t0)


def solve_direct(system, return_report: bool = False, refine_steps: int = 3):
    """Sparse factorization with symmetric ordering and diagonal pivots.

    Pivots are restricted to the diagonal, so the factorization is an
    LDL^T-type elimination; a non-positive pivot means the matrix is not
    positive definite. A few steps of iterative refinement follow the solve.
    """
    A, b = _unpack(system)
    t0 = time.perf_counter()
    try:
        lu = spla.splu(
            A.tocsc(),
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise IndefiniteSystemError(f"factorization failed: {exc}") from exc
    pivots = lu.U.diagonal()
    if np.any(lu.perm_r != lu.perm_c) or np.any(pivots <= 0.0):
        raise IndefiniteSystemError("non-positive pivot: the system is not positive definite")
    x = lu.solve(b)
    for _ in range(refine_steps):
        x += lu.solve(b - A @ x)
    if not return_report:
        return x
    return x, SolveReport("direct", 1, relative_residual(A, x, b), time.perf_counter() - t0)


def solve(system, method: str = "auto", tol: float = 1e-10, max_iter: int | None = None):
    """Dispatch: direct up to ``DIRECT_LIMIT`` unknowns for ``auto``, CG above."""
    if method == "auto":
        method = "direct" if system.n <= DIRECT_LIMIT else "cg"
    if method == "direct":
        return solve_direct(system, return_report=True)
    if method == "cg":
        return solve_cg(system, tol=tol, max_iter=max_iter)
    raise ValueError(f"unknown solver {method!r}")
