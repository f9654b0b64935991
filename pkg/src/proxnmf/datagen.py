"""
Seeded synthetic separable instances.

The first ``r`` columns are random non-negative rays with entries uniform
on [0, 100]; every remaining column combines between 2 and ``r`` of them
with weights uniform on (0, 1]. Columns are then scaled to unit sum.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import GenerationFailure, NoRegime, RegimeMismatch
from .matrix import DEFAULT_DEDUPE_TOL, dedupe_columns, l1_normalize_columns
from .oracle import REPRESENTABLE_TOL, nnls

__all__ = ["Regime", "NmfInstance", "classify_regime", "generate_instance"]

MAX_RETRIES = 50
ORACLE_MAX_N = 200


class Regime(str, enum.Enum):
    C1 = "c1"  # m >= n, m >= r
    C2 = "c2"  # r <= m <= n
    C3 = "c3"  # m <= r <= n
    AMBIGUOUS = "ambiguous"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def _matches(m, n, r):
    out = []
    if m >= n and m >= r:
        out.append(Regime.C1)
    if r <= m <= n:
        out.append(Regime.C2)
    if m <= r <= n:
        out.append(Regime.C3)
    return out


def classify_regime(m, n, r):
    """
    Dimension regime of an ``m x n`` problem with ``r`` anchors.

    Returns ``Regime.AMBIGUOUS`` on boundary cases matching several regimes.

    >>> classify_regime(100, 75, 25)
    <Regime.C1: 'c1'>
    """
    found = _matches(m, n, r)
    if not found:
        raise NoRegime(f"no regime matches m={m}, n={n}, r={r}")
    if len(found) > 1:
        return Regime.AMBIGUOUS
    return found[0]


@dataclass
class NmfInstance:
    """A generated problem with its ground truth. ``true_anchors`` is 0-based."""

    X_orig: np.ndarray
    Xn: np.ndarray
    scales: np.ndarray
    true_anchors: np.ndarray
    regime: Regime
    seed: int
    m: int
    n: int
    r: int
    shuffled: bool = False

    def meta(self):
        """JSON-ready description; anchor indices are 1-based."""
        return {
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "regime": self.regime.value,
            "seed": self.seed,
            "shuffled": self.shuffled,
            "true_anchors": [int(i) + 1 for i in self.true_anchors],
        }


def _is_extreme(F, i):
    others = np.delete(F, i, axis=1)
    if others.shape[1] == 0:
        return True
    _, res = nnls(others, F[:, i])
    return res > REPRESENTABLE_TOL


def _draw_rays(rng, m, r, check):
    F = rng.uniform(0.0, 100.0, size=(m, r))
    if not check:
        return F
    for _ in range(MAX_RETRIES):
        Fn = F / F.sum(axis=0)
        bad = [i for i in range(r) if not _is_extreme(Fn, i)]
        if not bad:
            return F
        F[:, bad] = rng.uniform(0.0, 100.0, size=(m, len(bad)))
    raise GenerationFailure(
        f"could not draw {r} simplicial rays in dimension {m} "
        f"after {MAX_RETRIES} retries")


def generate_instance(m, n, r, regime, seed, shuffle=False, certify=None):
    """
    Draw a separable ``m x n`` instance with ``r`` planted anchors.

    Parameters
    ----------
    m, n, r : int
        Dimensions; ``r >= 2`` and ``n > r``.
    regime : Regime or str
        Declared regime; must be consistent with the dimensions.
    seed : int
    shuffle : bool
        Permute the columns (and the ground truth with them).
    certify : bool, optional
        Check every planted ray against the cone of the others with NNLS,
        redrawing failures. Defaults to on when ``r > m`` (where a random
        draw can fail) or ``n <= 200``.

    Raises
    ------
    RegimeMismatch
        If the dimensions violate the declared regime.
    GenerationFailure
        If the retry budget is exhausted.
    """
    regime = Regime.parse(regime)
    if r < 2 or n <= r or m < 1:
        raise ValueError(f"need r >= 2 and n > r, got m={m}, n={n}, r={r}")
    if regime is Regime.AMBIGUOUS or regime not in _matches(m, n, r):
        raise RegimeMismatch(f"(m={m}, n={n}, r={r}) is not a {regime.value} problem")
    if certify is None:
        certify = r > m or n <= ORACLE_MAX_N

    rng = np.random.default_rng(seed)
    for _ in range(MAX_RETRIES):
        F = _draw_rays(rng, m, r, certify)
        X = np.empty((m, n), order="F")
        X[:, :r] = F
        for j in range(r, n):
            k = int(rng.integers(2, r + 1))
            subset = rng.choice(r, size=k, replace=False)
            # uniform on (0, 1]
            w = 1.0 - rng.random(k)
            X[:, j] = F[:, subset] @ w
        Xn, scales = l1_normalize_columns(X)
        _, keep, _ = dedupe_columns(Xn, DEFAULT_DEDUPE_TOL)
        if keep.size == n:
            break
    else:
        raise GenerationFailure(f"duplicate columns persisted after {MAX_RETRIES} retries")

    anchors = np.arange(r)
    if shuffle:
        perm = rng.permutation(n)
        X = np.asfortranarray(X[:, perm])
        Xn = np.asfortranarray(Xn[:, perm])
        scales = scales[perm]
        inv = np.empty(n, dtype=np.intp)
        inv[perm] = np.arange(n)
        anchors = np.sort(inv[:r])
    return NmfInstance(
        X_orig=X, Xn=Xn, scales=scales, true_anchors=anchors, regime=regime,
        seed=seed, m=m, n=n, r=r, shuffled=shuffle)
