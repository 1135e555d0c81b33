"""Dense complex linear algebra used by the tracker and the rigidity analysis.

Thin contracts over LAPACK (via numpy/scipy): pivot-checked solves,
QR least squares, SVD nullspaces with a relative rank cutoff, and batched
variants that report failures per matrix instead of raising.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, RankDeficient, SingularMatrix

DEFAULT_RANK_TOL = 1e-8
PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class NullspaceResult:
    rank: int
    basis: np.ndarray  # (cols, nullity), orthonormal columns
    tolerance_used: float
    singular_values: np.ndarray

    @property
    def nullity(self) -> int:
        return self.basis.shape[1]


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {A.shape}")
    return A


def solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by partial-pivot LU.

    Raises :class:`SingularMatrix` when a pivot is below ``1e-14 * ||A||``.
    """
    A = _as_matrix(A)
    b = np.asarray(b)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"solve needs a square matrix, got {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise DimensionError(f"rhs has length {b.shape[0]}, matrix has {A.shape[0]} rows")
    dtype = np.result_type(A, b, float)
    normA = np.linalg.norm(A, np.inf)
    if normA == 0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularMatrix
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A.astype(dtype), check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL * normA:
        raise SingularMatrix("pivot below tolerance")
    return sla.lu_solve((lu, piv), b.astype(dtype))


def least_squares_solve(A, b, rtol: float = 1e-12) -> np.ndarray:
    """Minimize ``||A x - b||`` for a tall full-column-rank ``A`` via QR."""
    A = _as_matrix(A)
    b = np.asarray(b)
    m, n = A.shape
    if m < n:
        raise DimensionError(f"least squares needs rows >= cols, got {A.shape}")
    if b.shape[0] != m:
        raise DimensionError(f"rhs has length {b.shape[0]}, matrix has {m} rows")
    dtype = np.result_type(A, b, float)
    Q, R = np.linalg.qr(A.astype(dtype), mode="reduced")
    d = np.abs(np.diag(R))
    if d.size == 0 or d.min() <= rtol * max(d.max(), np.finfo(float).tiny):
        raise RankDeficient("matrix is rank deficient below tolerance")
    return sla.solve_triangular(R, Q.conj().T @ b.astype(dtype))


def svd(A):
    return np.linalg.svd(_as_matrix(A), full_matrices=True)


def nullspace(A, tol: float = DEFAULT_RANK_TOL) -> NullspaceResult:
    """Numerical rank and an orthonormal nullspace basis.

    The rank counts singular values above ``tol * sigma_max``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = _as_matrix(A)
    m, n = A.shape
    if A.size == 0:
        return NullspaceResult(0, np.eye(n), tol, np.zeros(0))
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    basis = Vh[rank:].conj().T
    return NullspaceResult(rank, basis, tol, s)


def condition_number(A) -> float:
    s = np.linalg.svd(_as_matrix(A), compute_uv=False)
    if s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])


# -- batched kernels used by the path tracker ---------------------------------------


def batch_solve(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve a stack of square systems ``A[p] x[p] = b[p]``.

    Returns ``(x, ok)``; ``ok[p]`` is False for matrices that are exactly
    singular or produce non-finite solutions.  Never raises for singular
    members.
    """
    try:
        x = np.linalg.solve(A, b[..., None])[..., 0]
        ok = np.all(np.isfinite(x), axis=-1)
        return x, ok
    except np.linalg.LinAlgError:
        x = np.zeros_like(b)
        ok = np.zeros(A.shape[0], dtype=bool)
        for p in range(A.shape[0]):
            try:
                x[p] = np.linalg.solve(A[p], b[p])
                ok[p] = np.all(np.isfinite(x[p]))
            except np.linalg.LinAlgError:
                pass
        return x, ok


def batch_lstsq(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares for a stack of tall systems via batched QR."""
    Q, R = np.linalg.qr(A, mode="reduced")
    rhs = np.einsum("pji,pj->pi", Q.conj(), b)
    x, ok = batch_solve(R, rhs)
    d = np.abs(np.diagonal(R, axis1=1, axis2=2))
    ok &= d.min(axis=1) > 1e-14 * np.maximum(d.max(axis=1), 1e-300)
    return x, ok


def batch_condition(A: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(A, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = s[:, 0] / s[:, -1]
    c[~np.isfinite(c)] = np.inf
    return c
