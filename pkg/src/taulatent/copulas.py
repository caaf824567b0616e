"""Bivariate copula data generation parameterized by population Kendall's tau.

Clayton, Gumbel, Frank, and Gaussian families, each with an exact (non-MCMC)
sampling construction: gamma frailty for Clayton, positive-stable frailty for
Gumbel, conditional-distribution inversion for Frank, and correlated normals
for Gaussian. Uniform margins can be pushed through a menu of inverse CDFs;
being monotone, this never changes the sample's concordance structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri, stdtrit

from .rank_core import PairedSample

__all__ = [
    "FAMILIES",
    "MARGINALS",
    "CopulaSpec",
    "CopulaParameter",
    "debye1",
    "tau_to_parameter",
    "parameter_to_tau",
    "sample_copula",
]

FAMILIES = ("clayton", "gumbel", "frank", "gaussian")
MARGINALS = ("uniform", "std_normal", "exponential_rate1", "heavy_tail_t3")

_FRANK_THETA_MAX = 1e3
_FRANK_TAU_TOL = 1e-10


def _check_family_tau(family: str, tau: float) -> None:
    if family not in FAMILIES:
        raise ValueError(f"unknown copula family {family!r}")
    if not -1.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly inside (-1, 1), got {tau}")
    if family in ("clayton", "gumbel") and tau < 0.0:
        raise ValueError(f"tau unreachable for family {family!r}: needs tau >= 0")


@dataclass(frozen=True)
class CopulaSpec:
    """Recipe for one synthetic dataset: family, population tau, margins, size, seed."""

    family: str
    tau: float
    n: int
    seed: int
    marginal: str = "uniform"

    def __post_init__(self):
        _check_family_tau(self.family, self.tau)
        if self.marginal not in MARGINALS:
            raise ValueError(f"unknown marginal {self.marginal!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2 (a PairedSample needs two rows)")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class CopulaParameter:
    """Family-native dependence parameter (theta; the correlation for gaussian)."""

    family: str
    theta: float

    def __post_init__(self):
        f, t = self.family, self.theta
        if f == "clayton" and not t > 0:
            raise ValueError("clayton requires theta > 0")
        elif f == "gumbel" and not t >= 1:
            raise ValueError("gumbel requires theta >= 1")
        elif f == "frank" and t == 0:
            raise ValueError("frank requires theta != 0")
        elif f == "gaussian" and not -1 < t < 1:
            raise ValueError("gaussian requires |rho| < 1")
        elif f not in FAMILIES:
            raise ValueError(f"unknown copula family {f!r}")


def debye1(theta: float) -> float:
    """Order-1 Debye function (1/theta) * integral_0^theta t/(e^t - 1) dt."""
    if theta == 0.0:
        return 1.0

    def integrand(t):
        if t > 700.0:  # expm1 overflows; t/(e^t - 1) ~ t e^-t is sub-denormal
            return 0.0
        return t / math.expm1(t) if t != 0.0 else 1.0

    # beyond 700 the integrand is < 1e-300; cutting it keeps quad convergent
    upper = min(theta, 700.0) if theta > 0 else theta
    value, _ = quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=200)
    return value / theta


def _frank_tau(theta: float) -> float:
    return 1.0 + 4.0 * (debye1(theta) - 1.0) / theta


def _frank_theta_from_tau(tau: float) -> float:
    """Invert the Debye relation by bisection on theta > 0 (odd in theta)."""
    target = abs(tau)
    lo, hi = 1e-9, _FRANK_THETA_MAX
    if _frank_tau(hi) < target:
        raise ValueError(f"tau unreachable for family 'frank': |tau|={target} too close to 1")
    mid = 0.5 * (lo + hi)
    while abs(_frank_tau(mid) - target) > _FRANK_TAU_TOL:
        if _frank_tau(mid) < target:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-15 * mid:
            break
    return math.copysign(mid, tau)


def tau_to_parameter(family: str, tau: float) -> CopulaParameter:
    """Dependence parameter reproducing the requested population tau.

    Closed forms where the family has one; Frank goes through the order-1
    Debye function numerically. tau = 0 is the independence copula and has no
    parameter; `sample_copula` special-cases it.
    """
    _check_family_tau(family, tau)
    if tau == 0.0:
        raise ValueError("tau = 0 is the independence copula; no parameter exists")
    if family == "clayton":
        theta = 2.0 * tau / (1.0 - tau)
    elif family == "gumbel":
        theta = 1.0 / (1.0 - tau)
    elif family == "gaussian":
        theta = math.sin(math.pi * tau / 2.0)
    else:
        theta = _frank_theta_from_tau(tau)
    return CopulaParameter(family=family, theta=theta)


def parameter_to_tau(p: CopulaParameter) -> float:
    """Population Kendall's tau of the copula with this parameter."""
    if p.family == "clayton":
        return p.theta / (p.theta + 2.0)
    if p.family == "gumbel":
        return 1.0 - 1.0 / p.theta
    if p.family == "gaussian":
        return (2.0 / math.pi) * math.asin(p.theta)
    return _frank_tau(p.theta)


def _gaussian_pairs(rho: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
    return ndtr(z1), ndtr(z2)


def _clayton_pairs(theta: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    # gamma frailty: U = (1 + E/W)^(-1/theta) has the Clayton generator
    w = rng.gamma(1.0 / theta, 1.0, size=n)
    e1 = rng.standard_exponential(n)
    e2 = rng.standard_exponential(n)
    u = (1.0 + e1 / w) ** (-1.0 / theta)
    v = (1.0 + e2 / w) ** (-1.0 / theta)
    return u, v


def _gumbel_pairs(theta: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    # positive alpha-stable frailty with Laplace transform exp(-t^alpha)
    alpha = 1.0 / theta
    angle = rng.uniform(0.0, math.pi, size=n)
    e = rng.standard_exponential(n)
    s = (
        np.sin(alpha * angle)
        / np.sin(angle) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * angle) / e) ** ((1.0 - alpha) / alpha)
    )
    e1 = rng.standard_exponential(n)
    e2 = rng.standard_exponential(n)
    u = np.exp(-((e1 / s) ** alpha))
    v = np.exp(-((e2 / s) ** alpha))
    return u, v


def _frank_pairs(theta: float, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    # invert the conditional CDF of V given U = u at probability p
    u = rng.random(n)
    p = rng.random(n)
    a = np.exp(-theta * u)
    num = a * (1.0 - p) + p * math.exp(-theta)
    den = a * (1.0 - p) + p
    v = -(np.log(num) - np.log(den)) / theta
    return u, v


_COPULA_SAMPLERS = {
    "clayton": _clayton_pairs,
    "gumbel": _gumbel_pairs,
    "frank": _frank_pairs,
    "gaussian": _gaussian_pairs,
}

# smallest/largest arguments kept strictly inside (0, 1) before inverse CDFs
_UEPS = 1.1102230246251565e-16


def _apply_marginal(u: np.ndarray, marginal: str) -> np.ndarray:
    if marginal == "uniform":
        return u
    u = np.clip(u, _UEPS, 1.0 - _UEPS)
    if marginal == "std_normal":
        return ndtri(u)
    if marginal == "exponential_rate1":
        return -np.log1p(-u)
    return stdtrit(3, u)  # Student t with 3 df


def sample_copula(spec: CopulaSpec) -> PairedSample:
    """Draw n pairs under the spec (deterministic for a given seed).

    tau = 0 yields exact independence for every family. Marginal transforms
    are applied after all randomness is consumed, so samples with different
    marginals but the same seed share their ranks.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.tau == 0.0:
        u, v = rng.random(spec.n), rng.random(spec.n)
    else:
        theta = tau_to_parameter(spec.family, spec.tau).theta
        u, v = _COPULA_SAMPLERS[spec.family](theta, spec.n, rng)
    return PairedSample(x=_apply_marginal(u, spec.marginal), y=_apply_marginal(v, spec.marginal))
