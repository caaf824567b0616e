"""Paired rank data, concordance counts, Kendall's tau, and the T* statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InsufficientDataError",
    "PairedSample",
    "ConcordanceSummary",
    "concordance_indicator",
    "concordance_summary",
    "kendall_tau",
    "t_star",
]


class InsufficientDataError(ValueError):
    """Raised when a sample is too small for the requested statistic."""


@dataclass(frozen=True)
class PairedSample:
    """Two equal-length vectors of observed scores for the same n units.

    Raw scores are accepted; only their ordering matters downstream.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1:
            raise ValueError("x and y must be one-dimensional")
        if x.shape != y.shape:
            raise ValueError(f"length mismatch: {x.size} vs {y.size}")
        if x.size < 2:
            raise InsufficientDataError("insufficient data: need n >= 2")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("all entries must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class ConcordanceSummary:
    """Pair counts over all n(n-1)/2 unordered pairs of a sample."""

    concordant: int
    discordant: int
    tied: int

    def __post_init__(self):
        if min(self.concordant, self.discordant, self.tied) < 0:
            raise ValueError("pair counts must be non-negative")

    @property
    def total_pairs(self) -> int:
        return self.concordant + self.discordant + self.tied


def concordance_indicator(pair_i, pair_j) -> int:
    """Score one unordered pair of observations.

    Returns +1 if the pair is concordant (both coordinate differences have
    the same sign), -1 if discordant, and 0 on a tie in either coordinate.
    """
    dx = pair_i[0] - pair_j[0]
    dy = pair_i[1] - pair_j[1]
    if dx == 0.0 or dy == 0.0:
        return 0
    return 1 if (dx > 0) == (dy > 0) else -1


def _tie_pair_count(sorted_keys: np.ndarray) -> int:
    """Number of pairs sharing a key, given keys in sorted (grouped) order."""
    _, counts = np.unique(sorted_keys, return_counts=True, axis=0)
    counts = counts.astype(np.int64)
    return int(np.sum(counts * (counts - 1) // 2))


def _count_inversions(a: np.ndarray) -> tuple[int, np.ndarray]:
    """Count pairs i < j with a[i] > a[j]; also returns the sorted array."""
    m = a.size
    if m <= 128:
        gt = a[:, None] > a[None, :]
        inv = int(np.triu(gt, k=1).sum())
        return inv, np.sort(a, kind="stable")
    half = m // 2
    inv_l, left = _count_inversions(a[:half])
    inv_r, right = _count_inversions(a[half:])
    # cross pairs: element of left half strictly greater than element of right half
    le = np.searchsorted(left, right, side="right")
    cross = left.size * right.size - int(le.sum(dtype=np.int64))
    return inv_l + inv_r + cross, np.sort(np.concatenate([left, right]), kind="stable")


def concordance_summary(s: PairedSample) -> ConcordanceSummary:
    """Exact concordant/discordant/tied pair counts.

    Uses merge-based inversion counting, so the counts match brute-force
    pair enumeration exactly at O(n log n) cost.
    """
    n = s.n
    order = np.lexsort((s.y, s.x))
    xs = s.x[order]
    ys = s.y[order]

    n0 = n * (n - 1) // 2
    ties_x = _tie_pair_count(xs)
    ties_y = _tie_pair_count(np.sort(s.y, kind="stable"))
    ties_xy = _tie_pair_count(np.column_stack([xs, ys]))

    # After the (x, y) lexsort, inversions in y are exactly the discordant pairs:
    # equal-x blocks are y-sorted and contribute none, and ties in y are not
    # strict inversions.
    discordant, _ = _count_inversions(ys)
    tied = ties_x + ties_y - ties_xy
    concordant = n0 - tied - discordant
    return ConcordanceSummary(concordant=concordant, discordant=discordant, tied=tied)


def kendall_tau(s: PairedSample) -> float:
    """Kendall's tau: (concordant - discordant) / (n(n-1)/2).

    Tied pairs score zero in the numerator and stay in the denominator.
    """
    c = concordance_summary(s)
    return (c.concordant - c.discordant) / c.total_pairs


def t_star(tau: float, n: int) -> float:
    """Standardized test statistic tau * sqrt(9n(n-1) / (4n+10)).

    Its large-sample null distribution is standard normal.
    """
    if n < 2:
        raise InsufficientDataError("insufficient data: need n >= 2")
    if not -1.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [-1, 1], got {tau}")
    return tau * math.sqrt(9.0 * n * (n - 1) / (4.0 * n + 10.0))
