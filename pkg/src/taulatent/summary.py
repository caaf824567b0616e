"""Posterior summaries shared by every inference method.

Medians and central credible intervals, quantile-averaged posteriors across
simulation replications, and Savage-Dickey Bayes factors for the point null
tau = 0. Grid posteriors are summarized by inverse-CDF interpolation of the
cumulative trapezoid integral, evaluated in both grid orientations and
averaged — so a posterior and its mirror image produce exactly mirrored
quantiles. Sample posteriors use empirical quantiles, and a Gaussian kernel
density (Silverman bandwidth, reflected at the ±1 boundaries) for the density
at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .asymptotic import PosteriorGrid, PriorOnTau
from .latent import PosteriorSamples

__all__ = [
    "DEFAULT_PROBS",
    "PosteriorSummary",
    "QuantileAveragedPosterior",
    "posterior_quantiles",
    "density_at_zero",
    "reflected_kde_density",
    "silverman_bandwidth",
    "summarize",
    "savage_dickey_bf01",
    "quantile_average",
]

# 0.01 .. 0.99 in steps of 0.01; the resolution quantile-averaged curves use
DEFAULT_PROBS = np.arange(1, 100) / 100.0
DEFAULT_PROBS.setflags(write=False)

_KDE_CHUNK = 1 << 19


@dataclass(frozen=True)
class PosteriorSummary:
    median: float
    ci_low: float
    ci_high: float
    ci_level: float
    density_at_zero: float

    def __post_init__(self):
        if not 0.0 < self.ci_level < 1.0:
            raise ValueError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if not self.ci_low <= self.median <= self.ci_high:
            raise ValueError("requires ci_low <= median <= ci_high")
        if self.ci_low < -1.0 or self.ci_high > 1.0:
            raise ValueError("summary values must lie in [-1, 1]")
        if not self.density_at_zero >= 0.0:
            raise ValueError("density_at_zero must be non-negative")


@dataclass(frozen=True)
class QuantileAveragedPosterior:
    """Pointwise mean of posterior quantile functions across replications."""

    probs: np.ndarray
    avg_quantiles: np.ndarray
    replication_count: int

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        avg = np.asarray(self.avg_quantiles, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "avg_quantiles", avg)
        if probs.ndim != 1 or probs.shape != avg.shape or probs.size == 0:
            raise ValueError("probs and avg_quantiles must be 1-d and the same length")
        if not (np.diff(probs) > 0).all():
            raise ValueError("probs must be strictly increasing")
        if probs[0] <= 0.0 or probs[-1] >= 1.0:
            raise ValueError("probs must lie strictly inside (0, 1)")
        if not (np.diff(avg) >= 0).all():
            raise ValueError("avg_quantiles must be nondecreasing")
        if self.replication_count < 1:
            raise ValueError("replication_count must be positive")


def _oriented_quantiles(taus: np.ndarray, density: np.ndarray, probs: np.ndarray) -> np.ndarray:
    cdf = cumulative_trapezoid(density, taus, initial=0.0)
    total = cdf[-1]
    if not total > 0.0:
        raise ValueError("density integrates to zero")
    # collapse zero-density plateaus so np.interp never divides 0 by 0
    keep = np.concatenate(([True], np.diff(cdf) > 0))
    return np.interp(probs * total, cdf[keep], taus[keep])


def _grid_quantiles(grid: PosteriorGrid, probs: np.ndarray) -> np.ndarray:
    forward = _oriented_quantiles(grid.tau_grid, grid.density, probs)
    mirror = _oriented_quantiles(
        -grid.tau_grid[::-1], grid.density[::-1], 1.0 - probs
    )
    return 0.5 * (forward - mirror)


def posterior_quantiles(p: PosteriorGrid | PosteriorSamples, probs) -> np.ndarray:
    """Quantiles of a posterior at each probability in `probs`."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size == 0 or (probs <= 0.0).any() or (probs >= 1.0).any():
        raise ValueError("probs must be nonempty and lie strictly inside (0, 1)")
    if isinstance(p, PosteriorGrid):
        return _grid_quantiles(p, probs)
    if isinstance(p, PosteriorSamples):
        if p.n_draws == 0:
            raise ValueError("empty posterior: no draws to summarize")
        return np.quantile(p.tau_draws, probs)
    raise TypeError(f"expected PosteriorGrid or PosteriorSamples, got {type(p).__name__}")


def silverman_bandwidth(draws: np.ndarray) -> float:
    """Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5)."""
    draws = np.asarray(draws, dtype=np.float64)
    n = draws.size
    if n < 2:
        return 0.0
    sd = float(draws.std(ddof=1))
    q75, q25 = np.percentile(draws, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * spread * n ** -0.2


def reflected_kde_density(draws: np.ndarray, x, bandwidth: float | None = None):
    """Gaussian KDE on [-1, 1] with boundary reflection, evaluated at x.

    Each draw contributes kernels centered at itself and at its reflections
    through -1 and +1, which removes the mass the plain estimator would leak
    past the ends of tau's support.
    """
    draws = np.asarray(draws, dtype=np.float64)
    if draws.size == 0:
        raise ValueError("empty posterior: no draws to summarize")
    h = silverman_bandwidth(draws) if bandwidth is None else float(bandwidth)
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    pts = np.atleast_1d(x)
    if h <= 0.0:
        # all draws identical: a point mass
        dens = np.where(pts == draws[0], math.inf, 0.0)
        return float(dens[0]) if scalar else dens
    total = np.zeros_like(pts)
    for start in range(0, draws.size, _KDE_CHUNK):
        chunk = draws[start : start + _KDE_CHUNK]
        for centers in (chunk, -2.0 - chunk, 2.0 - chunk):
            z = (pts[:, None] - centers[None, :]) / h
            total += np.exp(-0.5 * z * z).sum(axis=1)
    dens = total / (draws.size * h * math.sqrt(2.0 * math.pi))
    return float(dens[0]) if scalar else dens


def density_at_zero(p: PosteriorGrid | PosteriorSamples) -> float:
    """Posterior density at tau = 0: exact grid interpolation for grids,
    reflected-kernel estimate for samples."""
    if isinstance(p, PosteriorGrid):
        if not p.tau_grid[0] <= 0.0 <= p.tau_grid[-1]:
            return 0.0
        return float(np.interp(0.0, p.tau_grid, p.density))
    if isinstance(p, PosteriorSamples):
        return reflected_kde_density(p.tau_draws, 0.0)
    raise TypeError(f"expected PosteriorGrid or PosteriorSamples, got {type(p).__name__}")


def summarize(p: PosteriorGrid | PosteriorSamples, ci_level: float = 0.95) -> PosteriorSummary:
    """Posterior median and central (equal-tailed) credible interval."""
    if not 0.0 < ci_level < 1.0:
        raise ValueError(f"ci_level must lie in (0, 1), got {ci_level}")
    alpha = 0.5 * (1.0 - ci_level)
    lo, med, hi = posterior_quantiles(p, np.array([alpha, 0.5, 1.0 - alpha]))
    return PosteriorSummary(
        median=float(med),
        ci_low=float(lo),
        ci_high=float(hi),
        ci_level=ci_level,
        density_at_zero=density_at_zero(p),
    )


def savage_dickey_bf01(p: PosteriorGrid | PosteriorSamples, prior: PriorOnTau) -> float:
    """BF01 for the point null tau = 0: posterior over prior density at 0."""
    prior_at_zero = float(prior.density(0.0))
    if not prior_at_zero > 0.0:
        raise ValueError(
            f"Savage-Dickey undefined: prior density at tau = 0 is {prior_at_zero}"
        )
    return density_at_zero(p) / prior_at_zero


def quantile_average(posteriors, probs=DEFAULT_PROBS) -> QuantileAveragedPosterior:
    """Arithmetic mean of the posteriors' quantile functions at each prob."""
    posteriors = list(posteriors)
    if not posteriors:
        raise ValueError("need at least one posterior to average")
    probs = np.asarray(probs, dtype=np.float64)
    rows = np.stack([posterior_quantiles(p, probs) for p in posteriors])
    return QuantileAveragedPosterior(
        probs=probs.copy(),
        avg_quantiles=rows.mean(axis=0),
        replication_count=len(posteriors),
    )
