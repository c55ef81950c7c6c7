"""Determinants, Pfaffians, and linear solves at configurable working precision.

Standard mode delegates det/solve to LAPACK (pivoted LU) through numpy; the
Pfaffian is a Parlett-Reid skew tridiagonalization with partial pivoting and
exact sign tracking through the permutation parity.  Extended mode reruns the
same algorithms in compensated double-double scalars.
"""
from __future__ import annotations

import enum

import numpy as np

from . import dd
from .params import DomainError, SingularMatrixError


class Precision(enum.Enum):
    STANDARD = "standard"
    EXTENDED = "extended"


def _as_matrix(mat) -> np.ndarray:
    a = np.asarray(mat)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    return a


def dd_wrap_matrix(a: np.ndarray):
    """Matrix of DD/CDD scalars from a numpy array (exact embedding)."""
    iscomplex = np.iscomplexobj(a)
    n, m = a.shape
    return [[dd.wrap(a[i, j], iscomplex) for j in range(m)] for i in range(n)]


def dd_lu_det(A):
    """Pivoted LU determinant over DD/CDD scalars; returns a DD/CDD (or 0.0)."""
    n = len(A)
    A = [row[:] for row in A]
    det = None
    sign = 1
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(A[i][k]))
        if abs(A[p][k]) == 0.0:
            return 0.0
        if p != k:
            A[p], A[k] = A[k], A[p]
            sign = -sign
        det = A[k][k] if det is None else det * A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            for j in range(k, n):
                A[i][j] = A[i][j] - f * A[k][j]
    if det is None:
        return 1.0
    return det if sign > 0 else -det


def dd_lu_solve(A, b):
    """Pivoted LU solve over DD/CDD scalars; returns a list of DD/CDD."""
    n = len(A)
    A = [row[:] for row in A]
    x = b[:]
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(A[i][k]))
        if abs(A[p][k]) == 0.0:
            raise SingularMatrixError("singular matrix in extended solve")
        if p != k:
            A[p], A[k] = A[k], A[p]
            x[p], x[k] = x[k], x[p]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            x[i] = x[i] - f * x[k]
            for j in range(k, n):
                A[i][j] = A[i][j] - f * A[k][j]
    for k in range(n - 1, -1, -1):
        acc = x[k]
        for j in range(k + 1, n):
            acc = acc - A[k][j] * x[j]
        x[k] = acc / A[k][k]
    return x


def _generic_lu_det(a: np.ndarray):
    v = dd_lu_det(dd_wrap_matrix(a))
    return v if isinstance(v, float) else dd.unwrap(v)


def det(mat, precision: Precision = Precision.STANDARD):
    """Determinant via pivoted LU; the empty matrix gives exactly 1."""
    a = _as_matrix(mat)
    if a.shape[0] == 0:
        return 1.0
    if precision is Precision.EXTENDED:
        return _generic_lu_det(a.astype(complex) if np.iscomplexobj(a) else a.astype(float))
    v = np.linalg.det(a)
    return complex(v) if np.iscomplexobj(a) else float(v)


def _pfaffian_float(a: np.ndarray):
    A = a.astype(complex) if np.iscomplexobj(a) else a.astype(float)
    n = A.shape[0]
    pf = 1.0 + 0j if np.iscomplexobj(a) else 1.0
    for k in range(0, n - 2, 2):
        p = int(np.argmax(np.abs(A[k + 1:, k]))) + k + 1
        if p != k + 1:
            A[[k + 1, p], :] = A[[p, k + 1], :]
            A[:, [k + 1, p]] = A[:, [p, k + 1]]
            pf = -pf
        piv = A[k + 1, k]
        if piv == 0:
            return 0.0
        pf *= A[k, k + 1]  # super-diagonal of the skew tridiagonal factor
        for i in range(k + 2, n):
            f = A[i, k] / piv
            A[i, :] -= f * A[k + 1, :]
            A[:, i] -= f * A[:, k + 1]
    return pf * A[n - 2, n - 1]


def dd_pfaffian(A):
    """Parlett-Reid Pfaffian over DD/CDD entries; returns DD/CDD (or 0.0)."""
    n = len(A)
    A = [row[:] for row in A]
    pf = None
    sign = 1
    for k in range(0, n - 2, 2):
        p = max(range(k + 1, n), key=lambda i: abs(A[i][k]))
        if p != k + 1:
            A[p], A[k + 1] = A[k + 1], A[p]
            for row in A:
                row[p], row[k + 1] = row[k + 1], row[p]
            sign = -sign
        piv = A[k + 1][k]
        if abs(piv) == 0.0:
            return 0.0
        pf = A[k][k + 1] if pf is None else pf * A[k][k + 1]
        for i in range(k + 2, n):
            f = A[i][k] / piv
            for j in range(n):
                A[i][j] = A[i][j] - f * A[k + 1][j]
            for row in A:
                row[i] = row[i] - f * row[k + 1]
    out = A[n - 2][n - 1] if pf is None else pf * A[n - 2][n - 1]
    return out if sign > 0 else -out


def _pfaffian_generic(a: np.ndarray):
    v = dd_pfaffian(dd_wrap_matrix(a))
    return v if isinstance(v, float) else dd.unwrap(v)


def pfaffian(mat, precision: Precision = Precision.STANDARD, check_skew: bool = True):
    """Pfaffian of an even-order skew-symmetric matrix (Parlett-Reid).

    The sign is tracked exactly through the permutation parity, so pf(M)^2 =
    det(M) holds including sign conventions.
    """
    a = _as_matrix(mat)
    n = a.shape[0]
    if n % 2:
        raise DomainError(f"pfaffian needs even order, got {n}")
    if n == 0:
        return 1.0
    if check_skew:
        scale = np.linalg.norm(a)
        if scale > 0 and np.linalg.norm(a + a.T) > 1e-10 * scale:
            raise DomainError("matrix fails the skew-symmetry check")
    if precision is Precision.EXTENDED:
        return _pfaffian_generic(a)
    return _pfaffian_float(a)


def _generic_lu_solve(a: np.ndarray, b: np.ndarray):
    iscomplex = np.iscomplexobj(a) or np.iscomplexobj(b)
    A = dd_wrap_matrix(a.astype(complex) if iscomplex else a)
    x = [dd.wrap(v, iscomplex) for v in b]
    return np.array([dd.unwrap(v) for v in dd_lu_solve(A, x)])


def solve(mat, rhs, precision: Precision = Precision.STANDARD) -> np.ndarray:
    """Solve mat @ x = rhs with one step of iterative refinement.

    Raises SingularMatrixError (with the estimated condition number) when the
    residual cannot be brought under 1e-10 * ||rhs||.
    """
    a = _as_matrix(mat)
    b = np.asarray(rhs)
    if b.shape != (a.shape[0],):
        raise DomainError(f"rhs shape {b.shape} does not match order {a.shape[0]}")
    if a.shape[0] == 0:
        return np.zeros(0)
    if precision is Precision.EXTENDED:
        return _generic_lu_solve(a, b)
    try:
        x = np.linalg.solve(a, b)
        r = b - a @ x
        x = x + np.linalg.solve(a, r)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    resid = np.linalg.norm(b - a @ x)
    if not np.all(np.isfinite(x)) or resid > 1e-10 * max(np.linalg.norm(b), 1e-300):
        raise SingularMatrixError("solve residual too large", cond=float(np.linalg.cond(a)))
    return x
