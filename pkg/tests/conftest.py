"""Shared test helpers: KS distances and a brute-force tau oracle."""

from __future__ import annotations

import numpy as np


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_against_cdf(draws: np.ndarray, cdf_x: np.ndarray, cdf_y: np.ndarray) -> float:
    """KS distance of draws against a tabulated CDF (interpolated)."""
    x = np.sort(np.asarray(draws, dtype=np.float64))
    n = x.size
    f = np.interp(x, cdf_x, cdf_y)
    upper = np.max(np.abs(np.arange(1, n + 1) / n - f))
    lower = np.max(np.abs(np.arange(0, n) / n - f))
    return float(max(upper, lower))


def brute_force_tau(x, y) -> float:
    """O(n^2) pair enumeration: concordant minus discordant over all pairs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    score = 0
    for i in range(n):
        for j in range(i + 1, n):
            prod = (x[i] - x[j]) * (y[i] - y[j])
            if prod > 0:
                score += 1
            elif prod < 0:
                score -= 1
    return score / (n * (n - 1) / 2)
