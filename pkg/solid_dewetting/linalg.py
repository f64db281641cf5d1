"""Sparse linear solves with a checked residual contract."""
import logging

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .exceptions import SolverError


logger = logging.getLogger(__name__)

MAX_REFINEMENTS = 3


def _residual(matrix, x, rhs) -> float:
    return float(np.linalg.norm(rhs - matrix @ x))


def _solve_direct(matrix, rhs, rtol):
    try:
        lu = splinalg.splu(matrix.tocsc())
    except RuntimeError as exc:
        # splu reports exact singularity as RuntimeError
        raise SolverError(f"sparse LU failed: {exc}", iterations=0) from exc
    x = lu.solve(rhs)
    target = rtol * np.linalg.norm(rhs)
    residual = _residual(matrix, x, rhs)
    steps = 0
    while residual > target and steps < MAX_REFINEMENTS:
        x = x + lu.solve(rhs - matrix @ x)
        residual = _residual(matrix, x, rhs)
        steps += 1
    if steps:
        logger.debug("Iterative refinement: %d step(s), residual %.3e", steps, residual)
    return x, steps, residual


def _solve_gmres(matrix, rhs, rtol, maxiter):
    csc = matrix.tocsc()
    try:
        ilu = splinalg.spilu(csc, drop_tol=1e-6, fill_factor=20)
    except RuntimeError as exc:
        raise SolverError(f"incomplete LU failed: {exc}", iterations=0) from exc
    preconditioner = splinalg.LinearOperator(matrix.shape, ilu.solve)
    iterations = []

    def count(_):
        iterations.append(1)

    x, info = splinalg.gmres(
        csc, rhs, M=preconditioner, rtol=rtol, atol=0.0, maxiter=maxiter, callback=count, callback_type="pr_norm"
    )
    if info < 0:
        raise SolverError(f"GMRES breakdown (info={info})", iterations=len(iterations))
    return x, len(iterations), _residual(matrix, x, rhs)


def solve_sparse(matrix, rhs, rtol: float = 1e-10, method: str = "direct", maxiter: int = 500) -> np.ndarray:
    """Solve ``matrix @ x = rhs`` and check ``||rhs - matrix @ x|| <= rtol * ||rhs||``.

    ``method`` is ``"direct"`` (sparse LU plus iterative refinement) or ``"gmres"``
    (GMRES with an incomplete-LU preconditioner). Raises SolverError on singular systems
    or when the residual contract is not met.
    """
    matrix = sparse.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    if matrix.shape[0] != matrix.shape[1]:
        raise SolverError(f"system is not square: {matrix.shape}")
    if rhs.shape != (matrix.shape[0],):
        raise SolverError(f"rhs has shape {rhs.shape}, system has dimension {matrix.shape[0]}")
    if not np.isfinite(matrix.data).all() or not np.isfinite(rhs).all():
        raise SolverError("non-finite entries in system or rhs")
    empty_rows = np.flatnonzero(np.diff(matrix.indptr) == 0)
    if len(empty_rows):
        raise SolverError(f"singular system: {len(empty_rows)} all-zero row(s), first at {empty_rows[0]}")

    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)

    if method == "direct":
        x, iterations, residual = _solve_direct(matrix, rhs, rtol)
    elif method == "gmres":
        x, iterations, residual = _solve_gmres(matrix, rhs, rtol, maxiter)
    else:
        raise ValueError(f"unknown solver method {method!r}")

    if not np.isfinite(x).all() or residual > rtol * rhs_norm:
        raise SolverError(f"{method} solve missed tolerance {rtol:.1e}", iterations=iterations, residual=residual)
    return x
