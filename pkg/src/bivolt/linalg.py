"""Dense linear-algebra kernels: matrix exponential, phi1 application, resolvent solves.

Everything operates on plain numpy arrays (row-major, float64/complex128).
The matrix exponential is scaling-and-squaring with a degree-13 Pade
approximant; linear solves go through an explicit LU factorization with
partial pivoting so near-singular systems are detected by pivot magnitude
instead of surfacing as garbage downstream.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "PoleHitError",
    "SingularMatrixError",
    "expm",
    "phi1_apply",
    "resolvent_apply",
    "lu_factor",
    "lu_solve",
    "solve",
]

# Degree-13 Pade coefficients and the largest 1-norm for which the unscaled
# approximant stays at machine accuracy.
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152

PIVOT_RTOL = 1e-12


class SingularMatrixError(ValueError):
    """LU factorization met a pivot below the singularity threshold."""

    def __init__(self, message: str, pivot: float = 0.0):
        super().__init__(message)
        self.pivot = pivot


class PoleHitError(ValueError):
    """A resolvent solve hit (numerically) an eigenvalue of the system matrix.

    Carries the offending frequency in ``s``.
    """

    def __init__(self, s: complex):
        super().__init__(f"resolvent pole hit: s = {s} lies on the spectrum")
        self.s = s


def _square_array(M, name: str = "matrix") -> np.ndarray:
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.issubdtype(A.dtype, np.complexfloating):
        A = A.astype(float)
    return A


def _pade13(A: np.ndarray):
    b = _PADE13_B
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return U, V


def expm(M, t: float = 1.0) -> np.ndarray:
    """Evaluate e^{M t} by scaling-and-squaring with the degree-13 Pade approximant."""
    A = _square_array(M, "expm argument")
    if not np.isfinite(t):
        raise ValueError("expm time must be finite")
    A = A * t
    nrm = np.linalg.norm(A, 1) if A.size else 0.0
    squarings = 0
    if nrm > _THETA13:
        squarings = int(math.ceil(math.log2(nrm / _THETA13)))
        A = A / (2.0 ** squarings)
    U, V = _pade13(A)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def phi1_apply(M, v) -> np.ndarray:
    """Apply phi1(M) = sum_{k>=1} M^{k-1}/k! to a vector.

    Computed as the top-right block of the exponential of the augmented
    matrix [[M, v], [0, 0]], which stays valid for singular M.
    """
    A = _square_array(M, "phi1 argument")
    vec = np.asarray(v)
    if vec.shape != (A.shape[0],):
        raise ValueError(
            f"phi1 vector has shape {vec.shape}; expected ({A.shape[0]},)")
    n = A.shape[0]
    W = np.zeros((n + 1, n + 1), dtype=np.result_type(A, vec, float))
    W[:n, :n] = A
    W[:n, n] = vec
    return expm(W)[:n, n]


def lu_factor(K, pivot_rtol: float = PIVOT_RTOL):
    """LU-factorize a square matrix with partial pivoting.

    Returns ``(lu, perm)`` where ``lu`` packs the unit-lower and upper factors
    and ``perm`` is the row permutation. Raises SingularMatrixError when a
    pivot falls below ``pivot_rtol * max-row-sum-norm``.
    """
    A = _square_array(K, "lu argument")
    A = np.array(A, copy=True)
    n = A.shape[0]
    scale = np.linalg.norm(A, np.inf) if n else 0.0
    tol = pivot_rtol * max(scale, np.finfo(float).tiny)
    perm = np.arange(n)
    for j in range(n):
        p = j + int(np.argmax(np.abs(A[j:, j])))
        pivot = abs(A[p, j])
        if pivot <= tol:
            raise SingularMatrixError(
                f"singular matrix: pivot {pivot:.3e} at column {j} "
                f"below threshold {tol:.3e}", pivot=pivot)
        if p != j:
            A[[j, p]] = A[[p, j]]
            perm[[j, p]] = perm[[p, j]]
        A[j + 1:, j] /= A[j, j]
        if j + 1 < n:
            A[j + 1:, j + 1:] -= np.outer(A[j + 1:, j], A[j, j + 1:])
    return A, perm


def lu_solve(lu: np.ndarray, perm: np.ndarray, B) -> np.ndarray:
    """Solve the system factorized by :func:`lu_factor` for one or many RHS."""
    rhs = np.asarray(B)
    single = rhs.ndim == 1
    X = rhs.reshape(-1, 1) if single else rhs
    if X.shape[0] != lu.shape[0]:
        raise ValueError(
            f"rhs has {X.shape[0]} rows; expected {lu.shape[0]}")
    X = np.array(X[perm], dtype=np.result_type(lu, X, float), copy=True)
    n = lu.shape[0]
    for j in range(n - 1):
        X[j + 1:] -= lu[j + 1:, j, None] * X[j]
    for j in range(n - 1, -1, -1):
        X[j] /= lu[j, j]
        if j:
            X[:j] -= lu[:j, j, None] * X[j]
    return X[:, 0] if single else X


def solve(K, B, pivot_rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Solve K X = B by LU with partial pivoting."""
    lu, perm = lu_factor(K, pivot_rtol=pivot_rtol)
    return lu_solve(lu, perm, B)


def resolvent_apply(A, s, V) -> np.ndarray:
    """Solve (s I - A) X = V; raises :class:`PoleHitError` when s sits on the spectrum."""
    Amat = _square_array(A, "resolvent matrix")
    s = complex(s)
    K = s * np.eye(Amat.shape[0]) - Amat
    try:
        return solve(K, np.asarray(V, dtype=complex))
    except SingularMatrixError as exc:
        raise PoleHitError(s) from exc
