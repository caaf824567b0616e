"""Bayesian estimation and testing of Kendall's tau.

Three routes to a posterior for tau: two asymptotic grid posteriors built on
the normal approximation to the T* statistic (unit variance, or a variance
estimated from the observed tau), and a latent-normal data-augmentation
sampler. Copula-based synthetic data generation and a parameter-recovery
simulation harness round out the package; the `taulatent` CLI exposes all of
it.
"""

from .asymptotic import (
    PosteriorGrid,
    PriorOnTau,
    asymptotic_posterior,
    asymptotic_posterior_from_stats,
    cosine_prior,
    enhanced_variance,
    prior_density,
)
from .copulas import (
    CopulaParameter,
    CopulaSpec,
    parameter_to_tau,
    sample_copula,
    tau_to_parameter,
)
from .latent import (
    ChainConfig,
    LatentState,
    PosteriorSamples,
    available_backends,
    default_backend,
    greiner_transform,
    initial_latent_state,
    run_chain,
    sample_truncated_normal,
    truncation_bounds,
)
from .rank_core import (
    ConcordanceSummary,
    InsufficientDataError,
    PairedSample,
    concordance_indicator,
    concordance_summary,
    kendall_tau,
    t_star,
)
from .summary import (
    PosteriorSummary,
    QuantileAveragedPosterior,
    quantile_average,
    savage_dickey_bf01,
    summarize,
)

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ConcordanceSummary",
    "CopulaParameter",
    "CopulaSpec",
    "InsufficientDataError",
    "LatentState",
    "PairedSample",
    "PosteriorGrid",
    "PosteriorSamples",
    "PosteriorSummary",
    "PriorOnTau",
    "QuantileAveragedPosterior",
    "__version__",
    "asymptotic_posterior",
    "asymptotic_posterior_from_stats",
    "available_backends",
    "concordance_indicator",
    "concordance_summary",
    "cosine_prior",
    "default_backend",
    "enhanced_variance",
    "greiner_transform",
    "initial_latent_state",
    "kendall_tau",
    "parameter_to_tau",
    "prior_density",
    "quantile_average",
    "run_chain",
    "sample_copula",
    "sample_truncated_normal",
    "savage_dickey_bf01",
    "summarize",
    "t_star",
    "tau_to_parameter",
    "truncation_bounds",
]
