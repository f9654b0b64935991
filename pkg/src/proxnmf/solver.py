"""
Proximal point solver for the reduced separable-NMF linear program.

Given a column-stochastic ``X`` (m x n), the program is::

    minimize    p . diag(C)
    subject to  A C = A,  C >= 0,     A = [X; 1^T]

and the anchor columns are the indices whose diagonal entry of the optimal
``C`` equals one. Neither the number of anchors nor any other rank hint is
an input.

The sign constraint is split off onto a copy ``Z = C``. Each iteration
minimizes the augmented objective::

    p . diag(C) + (1/t) ||Q + t (A C - A)||^2 + t delta ||C - Z + U||^2

in closed form, projects ``C + U`` onto the non-negative orthant to get the
next ``Z``, and takes dual ascent steps on ``Q`` and ``U``. The last term is
a proximal pull towards the projected iterate; without it the update is
undefined whenever ``A^T A`` is rank deficient, which is always the case for
separable data with more columns than anchors. ``Z`` is the reported iterate.

Clipping the unconstrained minimizer without the multiplier ``U`` can stall
at an infeasible point; the split form cannot. The step ``t`` is rebalanced
every few iterations so that the primal and dual residuals stay within a
factor ``10`` of each other.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import nnls as _scipy_nnls

from .errors import DimensionMismatch, EmptyAnchorSet, InvalidInput, NonFiniteState
from .matrix import as_matrix, frobenius_distance, gram_factor, pos_project

__all__ = [
    "SolverConfig",
    "SolverState",
    "FactorizationResult",
    "ProxIteration",
    "build_augmented",
    "generate_price_vector",
    "prox_step",
    "run_solver",
    "extract_anchors",
    "extract_weights",
    "resolve_weights",
    "refine_weights",
    "diagonal_gap",
    "denormalize",
]

NORMALIZATION_TOL = 1e-9
FEASIBILITY_FACTOR = 10.0


@dataclass(frozen=True)
class SolverConfig:
    """
    Tuning knobs for `run_solver`.

    epsilon : stopping threshold on ``||C_{k+1} - C_k||_F``; convergence also
        requires every entry of ``A C - A`` to be at most ``10 * epsilon``.
    step_t : constant proximal/dual step.
    ridge_delta : weight of the proximal pull towards the previous iterate.
        ``0`` recovers the bare closed form, which needs ``A^T A`` invertible.
    anchor_tau : a column is an anchor when its diagonal entry is at least
        ``1 - anchor_tau``.
    max_iters : iteration cap.
    adapt_every : rebalance ``step_t`` every this many iterations; ``0``
        keeps it fixed.
    seed : seed for the price vector.
    refine_weights : refit the weights on the detected anchor columns by NNLS.
    """

    epsilon: float = 1e-5
    step_t: float = 100.0
    ridge_delta: float = 1e-2
    anchor_tau: float = 0.05
    max_iters: int = 20000
    adapt_every: int = 20
    seed: int = 0
    refine_weights: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.step_t > 0:
            raise ValueError("step_t must be positive")
        if not self.ridge_delta >= 0:
            raise ValueError("ridge_delta must be non-negative")
        if not 0 < self.anchor_tau < 0.5:
            raise ValueError("anchor_tau must lie in (0, 0.5)")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        if int(self.adapt_every) != self.adapt_every or self.adapt_every < 0:
            raise ValueError("adapt_every must be a non-negative integer")


@dataclass
class SolverState:
    """
    Iterate of the split scheme.

    ``C`` is the non-negative iterate, ``Q`` the multiplier of ``A C = A``
    and ``U`` the scaled multiplier of the copy constraint. ``residual`` and
    ``split_gap`` are the primal residuals of the last unprojected update.
    ``feasibility`` is ``max |A C - A|``, filled in when it was evaluated.
    """

    C: np.ndarray
    Q: np.ndarray
    U: np.ndarray = None
    t: float = 100.0
    iter: int = 0
    last_step_norm: float = float("inf")
    feasibility: float = float("inf")
    residual: float = float("inf")
    split_gap: float = float("inf")

    def __post_init__(self):
        if self.U is None:
            self.U = np.zeros_like(self.C)

    @classmethod
    def initial(cls, A, t=100.0):
        n = A.shape[1]
        return cls(C=np.zeros((n, n)), Q=np.zeros_like(A), t=float(t))


@dataclass
class FactorizationResult:
    """
    Output of `run_solver`. Indices are 0-based.

    ``W`` is expressed over the normalized data: ``Xn ~= Xn[:, anchors] @ W``.
    """

    anchors: np.ndarray
    C_final: np.ndarray
    W: np.ndarray
    iterations: int
    converged: bool
    diag_values: np.ndarray
    diag_gap: float
    last_step_norm: float
    feasibility: float
    price: np.ndarray = field(repr=False)


def build_augmented(Xn):
    """Stack a row of ones under `Xn`."""
    Xn = as_matrix(Xn, "Xn")
    return np.asfortranarray(np.vstack([Xn, np.ones((1, Xn.shape[1]))]))


def generate_price_vector(n, seed):
    """Positive price vector with pairwise distinct entries, drawn on (0.5, 1.5)."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    while True:
        p = rng.uniform(0.5, 1.5, size=n)
        if np.unique(p).size == n:
            return p


BALANCE_MU = 10.0
BALANCE_FACTOR = 2.0
BALANCE_RANGE = 1e4


class ProxIteration:
    """
    Precomputed constants for repeated proximal steps on one problem.

    With ``H = (A^T A + delta I)^{-1}`` the C-update is::

        C_raw = H (A^T A - (diag(p) + 2 A^T Q) / (2t) + delta (Z - U))

    ``H A^T A`` and ``H diag(p)`` are formed once, so changing ``t`` costs
    one elementwise pass. The term in ``Q``, the ridge term and the product
    ``A C`` all go through the rank-k factors ``A = U_A diag(s) V^T`` held
    by the Gram handle, so one step costs ``O(k n max(m, n))`` instead of
    ``O(m n^2)``.
    """

    def __init__(self, A, handle, p, t):
        A = as_matrix(A, "A")
        p = np.asarray(p, dtype=np.float64)
        n = A.shape[1]
        if handle.n != n or p.shape != (n,):
            raise DimensionMismatch("A, handle and price vector disagree on n")
        self.A = A
        self.handle = handle
        self.p = p
        self.t0 = float(t)
        self._HG = handle.solve(A.T @ A)
        self._Hp = handle.solve(np.diag(p))
        self._const_t = None
        s = np.sqrt(handle.sq)
        self._V = handle.basis
        self._Vt = np.ascontiguousarray(handle.basis.T)
        self._Us = A @ handle.basis
        self._Ut = np.ascontiguousarray((self._Us / s).T)
        self._dual_w = (s / (handle.sq + handle.delta))[:, None]
        if handle.delta > 0:
            self._ridge_w = (handle.sq / (handle.sq + handle.delta))[:, None]
        else:
            self._ridge_w = None

    def _const(self, t):
        if self._const_t != t:
            self._const_val = self._HG - self._Hp / (2.0 * t)
            self._const_t = t
        return self._const_val

    def residual(self, C):
        """``A C - A`` through the factors; the discarded spectrum is at rounding level."""
        return self._Us @ (self._Vt @ C - self._Vt)

    def step(self, state):
        with np.errstate(invalid="ignore", over="ignore"):
            return self._step(state)

    def _step(self, state):
        t = state.t
        Z_prev, U = state.C, state.U
        C_raw = self._const(t) - self._V @ ((self._dual_w / t) * (self._Ut @ state.Q))
        if self._ridge_w is not None:
            W = Z_prev - U
            C_raw += W - self._V @ (self._ridge_w * (self._Vt @ W))
        Z = pos_project(C_raw + U)
        U = U + (C_raw - Z)
        resid = self.residual(C_raw)
        Q = state.Q + t * resid
        if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(Q))
                and np.all(np.isfinite(U))):
            raise NonFiniteState(
                f"non-finite iterate at step {state.iter + 1}; "
                "reduce step_t or raise ridge_delta")
        return SolverState(
            C=Z,
            Q=Q,
            U=U,
            t=t,
            iter=state.iter + 1,
            last_step_norm=frobenius_distance(Z, Z_prev),
            residual=float(np.linalg.norm(resid)),
            split_gap=frobenius_distance(C_raw, Z),
        )

    def feasibility(self, state):
        """Fill in ``state.feasibility`` and return it."""
        state.feasibility = float(np.abs(self.residual(state.C)).max())
        return state.feasibility

    def balance(self, state):
        """
        Rescale ``t`` when the primal residual and the dual residual
        ``2 t delta ||Z_k - Z_{k-1}||`` drift more than a factor 10 apart.
        ``U`` is rescaled with it; ``Q`` is unscaled and stays.
        """
        delta = self.handle.delta
        primal = np.hypot(state.residual, np.sqrt(delta) * state.split_gap)
        dual = 2.0 * state.t * delta * state.last_step_norm
        lo, hi = self.t0 / BALANCE_RANGE, self.t0 * BALANCE_RANGE
        if primal > BALANCE_MU * dual and state.t * BALANCE_FACTOR <= hi:
            factor = BALANCE_FACTOR
        elif dual > BALANCE_MU * primal and state.t / BALANCE_FACTOR >= lo:
            factor = 1.0 / BALANCE_FACTOR
        else:
            return state
        state.t *= factor
        state.U = state.U / factor
        return state


def prox_step(state, h, A, p, t=None):
    """
    One proximal point iteration, at step `t` (default ``state.t``).
    See `ProxIteration` for repeated use.
    """
    A = as_matrix(A, "A")
    if state.C.shape != (A.shape[1], A.shape[1]) or state.Q.shape != A.shape:
        raise DimensionMismatch("state dimensions inconsistent with A")
    if t is not None:
        state = replace(state, t=float(t))
    it = ProxIteration(A, h, p, state.t)
    nxt = it.step(state)
    it.feasibility(nxt)
    return nxt


def extract_anchors(C, tau):
    """Sorted indices ``i`` with ``C[i, i] >= 1 - tau``."""
    d = np.diag(np.asarray(C))
    return np.flatnonzero(d >= 1.0 - tau)


def diagonal_gap(diag, anchors):
    """Smallest accepted minus largest rejected diagonal entry."""
    mask = np.zeros(diag.shape[0], dtype=bool)
    mask[anchors] = True
    lo = diag[mask].min() if mask.any() else 1.0
    hi = diag[~mask].max() if (~mask).any() else 0.0
    return float(lo - hi)


def extract_weights(C, anchors):
    """Rows `anchors` of `C`."""
    anchors = np.asarray(anchors, dtype=np.intp)
    if anchors.size == 0:
        raise EmptyAnchorSet("no anchors to extract weights for")
    return np.array(C[anchors, :])


def resolve_weights(C, anchors):
    """
    Express every column over the anchors alone.

    A feasible ``C`` may represent a non-anchor column partly through other
    non-anchor columns, so the anchor rows of ``C`` do not reconstruct ``X``
    by themselves. Writing ``N`` for the non-anchor indices, ``X C = X``
    gives ``X_N (I - C_NN) = X_I C_IN``, hence::

        W = C_I + C_IN (I - C_NN)^{-1} C_N
    """
    C = np.asarray(C)
    W = extract_weights(C, anchors)
    n = C.shape[0]
    rest = np.setdiff1d(np.arange(n), anchors)
    if rest.size == 0:
        return W
    B = C[np.ix_(rest, rest)]
    try:
        fold = np.linalg.solve(np.eye(rest.size) - B, C[rest, :])
    except np.linalg.LinAlgError:
        fold = np.linalg.lstsq(np.eye(rest.size) - B, C[rest, :], rcond=None)[0]
    W = W + C[np.ix_(anchors, rest)] @ fold
    return pos_project(W)


def refine_weights(Xn, anchors, W=None):
    """Refit each column of `Xn` onto ``Xn[:, anchors]`` by NNLS."""
    Xn = as_matrix(Xn, "Xn")
    anchors = np.asarray(anchors, dtype=np.intp)
    if anchors.size == 0:
        raise EmptyAnchorSet("no anchors to refit weights on")
    F = Xn[:, anchors]
    out = np.zeros((anchors.size, Xn.shape[1]))
    for j in range(Xn.shape[1]):
        out[:, j] = _scipy_nnls(F, Xn[:, j])[0]
    out[:, anchors] = np.eye(anchors.size)
    if W is not None:
        # keep the solver's weights where the refit is no better
        W = np.asarray(W)
        old = np.linalg.norm(F @ W - Xn, axis=0)
        new = np.linalg.norm(F @ out - Xn, axis=0)
        worse = new > old
        out[:, worse] = W[:, worse]
    return out


def run_solver(Xn, cfg=None, callback=None):
    """
    Locate the anchor columns of a column-stochastic, duplicate-free matrix.

    Parameters
    ----------
    Xn : array_like, shape (m, n)
        Non-negative data whose columns each sum to one.
    cfg : SolverConfig, optional
    callback : callable, optional
        Called with each `SolverState`.

    Returns
    -------
    FactorizationResult

    Raises
    ------
    InvalidInput
        If `Xn` has negative entries or a column sum off by more than 1e-9.
    NonFiniteState
        If the iteration diverges.
    """
    cfg = cfg or SolverConfig()
    Xn = as_matrix(Xn, "Xn")
    if Xn.min() < 0:
        raise InvalidInput("Xn has negative entries")
    if np.abs(Xn.sum(axis=0) - 1.0).max() > NORMALIZATION_TOL:
        raise InvalidInput("Xn columns must sum to one; run l1_normalize_columns first")
    n = Xn.shape[1]

    A = build_augmented(Xn)
    h = gram_factor(A, cfg.ridge_delta)
    p = generate_price_vector(n, cfg.seed)
    it = ProxIteration(A, h, p, cfg.step_t)
    feas_tol = FEASIBILITY_FACTOR * cfg.epsilon

    state = SolverState.initial(A, cfg.step_t)
    converged = False
    while state.iter < cfg.max_iters:
        state = it.step(state)
        if state.last_step_norm <= cfg.epsilon and it.feasibility(state) <= feas_tol:
            converged = True
        if callback is not None:
            callback(state)
        if converged:
            break
        if cfg.adapt_every and state.iter % cfg.adapt_every == 0:
            it.balance(state)
    if not np.isfinite(state.feasibility):
        it.feasibility(state)

    C = state.C
    diag = np.diag(C).copy()
    anchors = extract_anchors(C, cfg.anchor_tau)
    if anchors.size:
        W = resolve_weights(C, anchors)
        if cfg.refine_weights:
            W = refine_weights(Xn, anchors, W)
    else:
        W = np.zeros((0, n))
    return FactorizationResult(
        anchors=anchors,
        C_final=C,
        W=W,
        iterations=state.iter,
        converged=converged,
        diag_values=diag,
        diag_gap=diagonal_gap(diag, anchors),
        last_step_norm=state.last_step_norm,
        feasibility=state.feasibility,
        price=p,
    )


def denormalize(anchors, W, scales):
    """
    Map weights over normalized data back to the original column scales, so
    that ``X[:, anchors] @ W_orig ~= X``.
    """
    anchors = np.asarray(anchors, dtype=np.intp)
    W = np.asarray(W, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if W.shape != (anchors.size, scales.size):
        raise DimensionMismatch(
            f"W has shape {W.shape}, expected ({anchors.size}, {scales.size})")
    return W * scales[None, :] / scales[anchors][:, None]
