"""
Independent checks for the solver: an active-set NNLS, brute-force
extreme-ray detection, feasibility measurement and reconstruction error.

Nothing here calls into `proxnmf.solver`.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyAnchorSet
from .matrix import as_matrix

__all__ = [
    "nnls",
    "nnls_kkt_violation",
    "brute_force_extreme_rays",
    "Phi2Report",
    "validate_phi2",
    "reconstruction_residual",
]

REPRESENTABLE_TOL = 1e-7


def nnls(B, y, tol=1e-10, max_iter=None):
    """
    Solve ``min ||B w - y||_2`` subject to ``w >= 0``.

    Lawson-Hanson active-set method. The passive-set subproblems are solved
    with ``lstsq`` so that rank-deficient passive sets do not break it.

    Parameters
    ----------
    B : array_like, shape (m, k)
    y : array_like, shape (m,)
    tol : float
        A zero variable enters the passive set only when its negative
        gradient exceeds ``tol``.
    max_iter : int, optional
        Outer iteration cap, default ``3 * k``.

    Returns
    -------
    w : ndarray, shape (k,)
    residual : float
        ``||B w - y||_2``.
    """
    B = np.asarray(B, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if B.ndim != 2 or y.ndim != 1 or B.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"incompatible shapes {B.shape} and {y.shape}")
    k = B.shape[1]
    w = np.zeros(k)
    if k == 0:
        return w, float(np.linalg.norm(y))
    passive = np.zeros(k, dtype=bool)
    max_iter = 3 * k if max_iter is None else max_iter
    # gradient entries scale like |B| * |y|
    gtol = tol * max(1.0, np.abs(B).max() * np.linalg.norm(y))

    for _ in range(max_iter):
        dual = B.T @ (y - B @ w)
        cand = np.where(~passive, dual, -np.inf)
        j = int(np.argmax(cand))
        if cand[j] <= gtol:
            break
        passive[j] = True
        while True:
            z = np.zeros(k)
            z[passive] = np.linalg.lstsq(B[:, passive], y, rcond=None)[0]
            if np.all(z[passive] > 0):
                w = z
                break
            neg = passive & (z <= 0)
            gap = w[neg] - z[neg]
            alpha = np.min(np.divide(w[neg], gap, out=np.zeros_like(gap), where=gap > 0))
            w = w + alpha * (z - w)
            passive &= w > 1e-15 * max(1.0, np.abs(w).max())
            w[~passive] = 0.0
            if not passive.any():
                break
    return w, float(np.linalg.norm(B @ w - y))


def nnls_kkt_violation(B, y, w):
    """
    Worst violation of the NNLS optimality conditions at `w`.

    With ``g = B^T (B w - y)``: positive variables need ``g_j = 0`` and zero
    variables need ``g_j >= 0``.
    """
    B = np.asarray(B, dtype=np.float64)
    g = B.T @ (B @ w - np.asarray(y, dtype=np.float64))
    pos = w > 0
    worst = 0.0
    if pos.any():
        worst = max(worst, float(np.abs(g[pos]).max()))
    if (~pos).any():
        worst = max(worst, float(max(0.0, -g[~pos].min())))
    return worst


def brute_force_extreme_rays(Xn, tol=REPRESENTABLE_TOL):
    """
    Columns not representable as a non-negative combination of the others.

    One NNLS per column, so only suited to small matrices.

    Returns
    -------
    ndarray of int
        Sorted 0-based indices.
    """
    Xn = as_matrix(Xn, "Xn")
    n = Xn.shape[1]
    out = []
    for j in range(n):
        others = np.delete(Xn, j, axis=1)
        _, res = nnls(others, Xn[:, j])
        if res > tol:
            out.append(j)
    return np.asarray(out, dtype=np.intp)


@dataclass(frozen=True)
class Phi2Report:
    """Constraint violations of ``X C = X, C^T 1 = 1, C >= 0``."""

    max_equality_violation: float
    max_column_sum_violation: float
    min_entry: float

    def feasible(self, eta):
        return (self.max_equality_violation <= eta
                and self.max_column_sum_violation <= eta
                and self.min_entry >= -eta)

    def as_dict(self):
        return {
            "max_equality_violation": self.max_equality_violation,
            "max_column_sum_violation": self.max_column_sum_violation,
            "min_entry": self.min_entry,
        }


def validate_phi2(Xn, C):
    Xn = np.asarray(Xn, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    n = Xn.shape[1]
    if C.shape != (n, n):
        raise DimensionMismatch(f"C has shape {C.shape}, expected ({n}, {n})")
    return Phi2Report(
        max_equality_violation=float(np.abs(Xn @ C - Xn).max()),
        max_column_sum_violation=float(np.abs(C.sum(axis=0) - 1.0).max()),
        min_entry=float(C.min()),
    )


def reconstruction_residual(X, anchors, W):
    """``||X - X[:, anchors] W||_F / ||X||_F``."""
    X = np.asarray(X, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.intp)
    W = np.asarray(W, dtype=np.float64)
    if anchors.size == 0:
        raise EmptyAnchorSet("reconstruction needs at least one anchor")
    if W.shape != (anchors.size, X.shape[1]):
        raise DimensionMismatch(
            f"W has shape {W.shape}, expected ({anchors.size}, {X.shape[1]})")
    return float(np.linalg.norm(X - X[:, anchors] @ W) / np.linalg.norm(X))
