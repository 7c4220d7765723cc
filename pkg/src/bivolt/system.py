"""Bilinear state-space model, validation, implicit-form folding, effective excitation.

The model is

    E x'(t) = A x(t) + sum_j N_j u_j(t) x(t) + B u(t),    x(0) = x0,
      y(t)  = C x(t),

with E optional (identity when absent). All downstream numerics expect an
explicit system; fold E eagerly with :func:`fold_implicit`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SingularMatrixError, lu_factor, lu_solve

__all__ = [
    "BilinearSystem",
    "EffectiveExcitation",
    "validate",
    "fold_implicit",
    "effective_matrices",
    "require_explicit",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BilinearSystem:
    """Dense bilinear system (A, N_1..N_m, B, C, x0, optional E).

    ``N`` is stored as an (m, n, n) stack; a single 2-D array is promoted to
    m = 1. ``x0`` defaults to zeros. Construction only coerces array shapes;
    call :func:`validate` to get a full list of invariant violations.
    """

    A: np.ndarray
    N: np.ndarray
    B: np.ndarray
    C: np.ndarray
    x0: np.ndarray | None = None
    E: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        N = np.asarray(self.N, dtype=float)
        if N.ndim == 2:
            N = N[None, :, :]
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        x0 = self.x0
        x0 = np.zeros(A.shape[0]) if x0 is None else np.asarray(x0, dtype=float).ravel()
        E = self.E
        if E is not None:
            E = np.atleast_2d(np.asarray(E, dtype=float))
        for name, value in (("A", A), ("N", N), ("B", B), ("C", C),
                            ("x0", x0), ("E", E)):
            if value is not None:
                object.__setattr__(self, name, _freeze(value))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]


@dataclass(frozen=True)
class EffectiveExcitation:
    """Impulse-weighted excitation matrices Nhat = sum_j N_j mu_j, bhat = B mu."""

    Nhat: np.ndarray
    bhat: np.ndarray


def validate(sys: BilinearSystem) -> list[str]:
    """Return every invariant violation as a message; empty list when valid."""
    violations: list[str] = []
    n = sys.A.shape[0]
    if sys.A.ndim != 2 or sys.A.shape != (n, n):
        violations.append(f"A must be square, got shape {sys.A.shape}")
    if n < 1:
        violations.append("state dimension n must be >= 1")
    m = sys.B.shape[1] if sys.B.ndim == 2 else 0
    if sys.B.ndim != 2 or sys.B.shape[0] != n:
        violations.append(f"B has shape {sys.B.shape}; expected ({n}, m)")
    if m < 1:
        violations.append("input dimension m must be >= 1")
    if sys.N.ndim != 3 or sys.N.shape[1:] != (n, n):
        violations.append(f"N has shape {sys.N.shape}; expected (m, {n}, {n})")
    elif m >= 1 and sys.N.shape[0] != m:
        violations.append(
            f"N holds {sys.N.shape[0]} matrices; expected m = {m}")
    p = sys.C.shape[0] if sys.C.ndim == 2 else 0
    if sys.C.ndim != 2 or sys.C.shape[1] != n:
        violations.append(f"C has shape {sys.C.shape}; expected (p, {n})")
    if p < 1:
        violations.append("output dimension p must be >= 1")
    if sys.x0.shape != (n,):
        violations.append(f"x0 has shape {sys.x0.shape}; expected ({n},)")
    for name in ("A", "N", "B", "C", "x0"):
        arr = getattr(sys, name)
        if arr.size and not np.all(np.isfinite(arr)):
            violations.append(f"{name} has non-finite entries")
    if sys.E is not None:
        if sys.E.shape != (n, n):
            violations.append(f"E has shape {sys.E.shape}; expected ({n}, {n})")
        elif not np.all(np.isfinite(sys.E)):
            violations.append("E has non-finite entries")
        else:
            try:
                lu_factor(sys.E)
            except SingularMatrixError:
                violations.append("E is singular (LU pivot below threshold)")
    return violations


def require_explicit(sys: BilinearSystem) -> None:
    """Raise when a system still carries E; callers expect explicit form."""
    if sys.E is not None:
        raise ValueError(
            "system is in implicit form; apply fold_implicit(sys) first")


def fold_implicit(sys: BilinearSystem) -> BilinearSystem:
    """Fold a nonsingular E into the system: A, N_j, B -> E^{-1}A, E^{-1}N_j, E^{-1}B."""
    if sys.E is None:
        return sys
    try:
        lu, perm = lu_factor(sys.E)
    except SingularMatrixError as exc:
        raise ValueError("cannot fold implicit system: E is singular") from exc
    n, m = sys.n, sys.m
    stacked = np.hstack([sys.A] + [sys.N[j] for j in range(sys.N.shape[0])] + [sys.B])
    folded = lu_solve(lu, perm, stacked)
    A = folded[:, :n]
    N = np.stack([folded[:, n * (j + 1): n * (j + 2)]
                  for j in range(sys.N.shape[0])])
    B = folded[:, n * (sys.N.shape[0] + 1):]
    return BilinearSystem(A=A, N=N, B=B, C=sys.C, x0=sys.x0, E=None)


def effective_matrices(sys: BilinearSystem, mu) -> EffectiveExcitation:
    """Build Nhat = sum_j N_j mu_j and bhat = B mu for impulse weights mu."""
    weights = np.atleast_1d(np.asarray(mu, dtype=float))
    if weights.shape != (sys.m,):
        raise ValueError(
            f"mu has shape {weights.shape}; expected ({sys.m},)")
    if not np.all(np.isfinite(weights)):
        raise ValueError("mu has non-finite entries")
    Nhat = np.tensordot(weights, sys.N, axes=1)
    bhat = sys.B @ weights
    return EffectiveExcitation(Nhat=Nhat, bhat=bhat)
