"""Latent-normal data augmentation for Kendall's tau.

Observed ranks are treated as discretized views of a bivariate standard
normal; a Gibbs sweep redraws the latent scores inside the bands their rank
neighbours allow, and a Metropolis step on Fisher's z-scale updates the
latent correlation. Greiner's relation tau = (2/pi) asin(rho) maps the
correlation draws to tau draws.

Chain execution dispatches to the compiled kernel in `_chain` when it was
built, otherwise to the pure-Python fallback `_chain_py`. Both produce
bit-identical chains for the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from . import _chain_py
from .rank_core import InsufficientDataError, PairedSample, kendall_tau
from .truncnorm import sample_truncated_normal

try:
    from . import _chain as _compiled
except ImportError:  # extension not built; pure-Python fallback
    _compiled = None

__all__ = [
    "ChainConfig",
    "LatentState",
    "PosteriorSamples",
    "available_backends",
    "default_backend",
    "truncation_bounds",
    "sample_truncated_normal",
    "initial_latent_state",
    "gibbs_update_latents",
    "mh_update_rho",
    "greiner_transform",
    "run_chain",
]


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def default_backend() -> str:
    return "compiled" if _compiled is not None else "python"


def _kernel(backend: str | None):
    if backend is None:
        backend = default_backend()
    if backend == "python":
        return _chain_py.run_chain_kernel
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available; build the extension")
        return _compiled.run_chain_kernel
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class ChainConfig:
    total_iterations: int = 5500
    burn_in: int = 500
    thinning: int = 1
    seed: int = 0
    proposal_sd_scale: float = 1.0
    hastings_correction: bool = False

    def __post_init__(self):
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be positive")
        if not 0 <= self.burn_in < self.total_iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < total_iterations")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.proposal_sd_scale <= 0:
            raise ValueError("proposal_sd_scale must be positive")


@dataclass(frozen=True)
class LatentState:
    """Latent scores plus the current latent correlation."""

    z_x: np.ndarray
    z_y: np.ndarray
    rho: float

    def __post_init__(self):
        z_x = np.asarray(self.z_x, dtype=np.float64)
        z_y = np.asarray(self.z_y, dtype=np.float64)
        if z_x.shape != z_y.shape or z_x.ndim != 1:
            raise ValueError("z_x and z_y must be 1-d and the same length")
        if not -1.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie strictly inside (-1, 1), got {self.rho}")
        object.__setattr__(self, "z_x", z_x)
        object.__setattr__(self, "z_y", z_y)

    def check_ordinal(self, s: PairedSample) -> None:
        """Raise unless the latents respect the sample's strict rank order."""
        for z, obs, label in ((self.z_x, s.x, "z_x"), (self.z_y, s.y, "z_y")):
            _, groups = _chain_py.rank_groups(obs)
            for g in range(len(groups) - 1):
                if max(z[j] for j in groups[g]) >= min(z[j] for j in groups[g + 1]):
                    raise ValueError(f"{label} violates the ordinal constraints of the sample")


@dataclass(frozen=True)
class PosteriorSamples:
    """Post-burn-in draws of the latent correlation and their tau transforms."""

    rho_draws: np.ndarray
    tau_draws: np.ndarray
    acceptance_rate: float
    config: ChainConfig = field(repr=False)

    @property
    def n_draws(self) -> int:
        return self.rho_draws.size


def truncation_bounds(latents, observed, i: int) -> tuple[float, float]:
    """Band the rank order imposes on latent i.

    Lower bound: largest latent among strictly smaller observations; upper
    bound: smallest latent among strictly larger ones. Ties impose nothing.
    """
    latents = np.asarray(latents, dtype=np.float64)
    observed = np.asarray(observed, dtype=np.float64)
    if latents.shape != observed.shape or latents.ndim != 1:
        raise ValueError("latents and observed must be 1-d and the same length")
    if not 0 <= i < latents.size:
        raise IndexError(f"index {i} out of range")
    below = observed < observed[i]
    above = observed > observed[i]
    lower = float(latents[below].max()) if below.any() else -math.inf
    upper = float(latents[above].min()) if above.any() else math.inf
    return lower, upper


def greiner_transform(rho: float) -> float:
    """Greiner's relation tau = (2/pi) asin(rho)."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho}")
    return (2.0 / math.pi) * math.asin(rho)


def initial_latent_state(s: PairedSample) -> LatentState:
    """Starting point inside the ordinal-feasible region near the likely mode:
    latents at normal scores of the mid-ranks, rho at the Greiner inverse of
    the observed tau (clamped away from the boundary)."""
    n = s.n
    z_x = ndtri(rankdata(s.x, method="average") / (n + 1))
    z_y = ndtri(rankdata(s.y, method="average") / (n + 1))
    rho0 = math.sin(math.pi * kendall_tau(s) / 2.0)
    rho0 = min(0.99, max(-0.99, rho0))
    return LatentState(z_x=z_x, z_y=z_y, rho=rho0)


def gibbs_update_latents(state: LatentState, s: PairedSample, rng) -> LatentState:
    """One full ordered sweep over z_x then z_y.

    Each latent is redrawn from its truncated-normal full conditional given
    the current correlation and its partner score.
    """
    state.check_ordinal(s)
    inv_x, groups_x = _chain_py.rank_groups(s.x)
    inv_y, groups_y = _chain_py.rank_groups(s.y)
    z_x = [float(v) for v in state.z_x]
    z_y = [float(v) for v in state.z_y]
    rho = state.rho
    sigma = math.sqrt(1.0 - rho * rho)
    _chain_py.gibbs_sweep(z_x, z_y, inv_x, groups_x, rho, sigma, rng)
    _chain_py.gibbs_sweep(z_y, z_x, inv_y, groups_y, rho, sigma, rng)
    return LatentState(z_x=np.array(z_x), z_y=np.array(z_y), rho=rho)


def mh_update_rho(
    state: LatentState,
    n: int,
    rng,
    proposal_sd_scale: float = 1.0,
    hastings_correction: bool = False,
) -> tuple[float, bool]:
    """One Metropolis update of rho given fixed latents.

    Proposes on Fisher's z-scale with sd proposal_sd_scale / sqrt(n - 3) and
    by default accepts on the bivariate-normal likelihood ratio alone, which
    leaves the chain stationary for the likelihood under a prior flat on the
    z-scale (equivalently, proportional to 1/(1-rho^2) in rho). With
    hastings_correction=True the ratio gains the tanh-Jacobian factor
    (1-rho*^2)/(1-rho^2), and the chain targets the likelihood under a prior
    uniform on rho itself.
    """
    if n <= 3:
        raise InsufficientDataError("Fisher proposal undefined: need n >= 4")
    if n != state.z_x.size:
        raise ValueError(f"n={n} does not match the state's {state.z_x.size} latents")
    z_x = state.z_x
    z_y = state.z_y
    sxx = 0.0
    sxy = 0.0
    syy = 0.0
    for i in range(n):
        sxx += z_x[i] * z_x[i]
        sxy += z_x[i] * z_y[i]
        syy += z_y[i] * z_y[i]
    prop_sd = proposal_sd_scale / math.sqrt(n - 3)
    return _chain_py.mh_step(
        state.rho, sxx, sxy, syy, n, prop_sd, hastings_correction, rng
    )


def run_chain(
    s: PairedSample,
    config: ChainConfig | None = None,
    backend: str | None = None,
) -> PosteriorSamples:
    """Run the data-augmentation chain on a paired sample.

    Alternates a Gibbs sweep over the latents with a Metropolis update of the
    correlation; discards burn-in, thins, and maps the kept rho draws to tau.
    Identical seed and input give bit-identical output.
    """
    if config is None:
        config = ChainConfig()
    if s.n <= 3:
        raise InsufficientDataError("Fisher proposal undefined: need n >= 4")

    state0 = initial_latent_state(s)
    prop_sd = config.proposal_sd_scale / math.sqrt(s.n - 3)
    rng = np.random.default_rng(config.seed)
    kernel = _kernel(backend)
    rho_all, accept_count = kernel(
        s.x,
        s.y,
        state0.z_x,
        state0.z_y,
        state0.rho,
        config.total_iterations,
        config.burn_in,
        prop_sd,
        config.hastings_correction,
        rng,
    )
    kept = np.array(rho_all[config.burn_in :: config.thinning])
    # scalar transform per draw: np.arcsin may differ from math.asin by an
    # ulp, and tau_draws is contractually the exact image of rho_draws
    tau = np.array([greiner_transform(r) for r in kept])
    rate = accept_count / (config.total_iterations - config.burn_in)
    return PosteriorSamples(
        rho_draws=kept, tau_draws=tau, acceptance_rate=rate, config=config
    )
