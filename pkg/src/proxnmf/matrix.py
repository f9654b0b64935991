"""
Dense kernels used by the proximal point solver.

Matrices are plain float64 ``numpy.ndarray`` objects stored column-major
(Fortran order), since normalization, column extraction and Gram products
all walk columns.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NegativeEntry, SingularGram, ZeroColumn

__all__ = [
    "as_matrix",
    "l1_normalize_columns",
    "pos_project",
    "GramSolveHandle",
    "gram_factor",
    "gram_solve",
    "dedupe_columns",
    "frobenius_distance",
]

DEFAULT_DEDUPE_TOL = 1e-9


def as_matrix(X, name="matrix"):
    """Return `X` as a finite, 2-D, column-major float64 array."""
    X = np.asfortranarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def l1_normalize_columns(X):
    """
    Scale every column of a non-negative matrix to unit sum.

    Parameters
    ----------
    X : array_like, shape (m, n)
        Non-negative data, every column with positive mass.

    Returns
    -------
    Xn : ndarray, shape (m, n)
        Column-stochastic copy of `X`.
    scales : ndarray, shape (n,)
        Original column sums, so that ``Xn * scales == X``.

    Raises
    ------
    NegativeEntry
        If any entry of `X` is negative (indices are 0-based).
    ZeroColumn
        If a column sums to zero (index is 0-based).
    """
    X = as_matrix(X, "X")
    neg = np.argwhere(X < 0)
    if len(neg):
        i, j = neg[np.lexsort((neg[:, 0], neg[:, 1]))[0]]
        raise NegativeEntry(int(i), int(j))
    scales = X.sum(axis=0)
    zero = np.flatnonzero(scales <= 0)
    if len(zero):
        raise ZeroColumn(int(zero[0]))
    return np.asfortranarray(X / scales), scales


def pos_project(M):
    """Elementwise ``max(M, 0)``."""
    return np.maximum(M, 0.0)


@dataclass(frozen=True)
class GramSolveHandle:
    """
    Spectral factorization of ``A.T @ A + delta * I``.

    Only the numerically nonzero part of the spectrum is stored: ``basis``
    holds the right singular vectors of `A` for the retained singular values
    and ``sq`` their squares. Every other direction has eigenvalue `delta`.
    A separable data matrix has rank equal to its anchor count, so the
    retained rank is usually far below `n` and a solve against an ``n x n``
    right-hand side costs ``O(k n^2)`` instead of ``O(n^3)``.
    """

    basis: np.ndarray
    sq: np.ndarray
    delta: float
    n: int

    @property
    def rank(self):
        return self.sq.shape[0]

    def _check(self, B):
        B = np.asarray(B, dtype=np.float64)
        if B.shape[0] != self.n:
            raise DimensionMismatch(
                f"right-hand side has {B.shape[0]} rows, expected {self.n}")
        return B

    def solve(self, B):
        """Return ``(A.T A + delta I)^{-1} B``."""
        B = self._check(B)
        V = self.basis
        VB = V.T @ B
        if self.delta == 0.0:
            return V @ (VB / _col(self.sq, VB))
        # range part through the spectrum, complement part scaled by 1/delta
        inner = V @ (VB / _col(self.sq + self.delta, VB))
        return inner + (B - V @ VB) / self.delta

    def ridge_solve(self, B):
        """Return ``delta * (A.T A + delta I)^{-1} B`` without dividing by delta."""
        B = self._check(B)
        if self.delta == 0.0:
            return np.zeros_like(B)
        V = self.basis
        VB = V.T @ B
        return B - V @ (VB * _col(self.sq / (self.sq + self.delta), VB))


def _col(v, like):
    return v[:, None] if like.ndim == 2 else v


def gram_factor(A, delta):
    """
    Factor ``A.T @ A + delta * I`` once for repeated solves.

    Raises
    ------
    SingularGram
        If ``delta == 0`` and `A` does not have full column rank.
    """
    A = as_matrix(A, "A")
    delta = float(delta)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    _, s, Vt = np.linalg.svd(A, full_matrices=False)
    n = A.shape[1]
    cutoff = s[0] * max(A.shape) * np.finfo(np.float64).eps if len(s) else 0.0
    keep = s > cutoff
    if delta == 0.0 and keep.sum() < n:
        raise SingularGram(
            f"A^T A is singular (rank {int(keep.sum())} < {n}); supply delta > 0")
    basis = np.ascontiguousarray(Vt[keep].T)
    sq = s[keep] ** 2
    basis.setflags(write=False)
    sq.setflags(write=False)
    return GramSolveHandle(basis=basis, sq=sq, delta=delta, n=n)


def gram_solve(h, B):
    """Solve ``(A.T A + delta I) Z = B`` with a handle from `gram_factor`."""
    return h.solve(B)


def dedupe_columns(Xn, tol=DEFAULT_DEDUPE_TOL):
    """
    Drop columns lying within L1 distance `tol` of an earlier retained column.

    Returns
    -------
    Xd : ndarray
        The retained columns, in original order.
    keep : ndarray of int
        Sorted 0-based indices of the retained columns.
    dup_map : dict
        Dropped column index -> index of its retained representative.
    """
    Xn = as_matrix(Xn, "Xn")
    n = Xn.shape[1]
    keep = []
    dup_map = {}
    for j in range(n):
        if keep:
            dist = np.abs(Xn[:, keep] - Xn[:, j:j + 1]).sum(axis=0)
            k = int(np.argmin(dist))
            if dist[k] <= tol:
                dup_map[j] = keep[k]
                continue
        keep.append(j)
    keep = np.asarray(keep, dtype=np.intp)
    return np.asfortranarray(Xn[:, keep]), keep, dup_map


def frobenius_distance(A, B):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))
