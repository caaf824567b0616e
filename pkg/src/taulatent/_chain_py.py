"""Pure-Python kernel for the latent-normal Gibbs/Metropolis chain.

Fallback used when the compiled extension is unavailable. The compiled kernel
in `_chain.pyx` mirrors this module's arithmetic expression-for-expression
(same random-stream consumption, same operation order), so the two backends
produce bit-identical chains. Keep them in sync.
"""

from __future__ import annotations

import math

import numpy as np

from .truncnorm import sample_truncated_normal

BACKEND_NAME = "python"

_LOG_2PI = 1.8378770664093453


def rank_groups(observed: np.ndarray) -> tuple[np.ndarray, list[list[int]]]:
    """Group indices by observed value: (group id per element, members per group).

    Groups are ordered by increasing observed value; tied observations share
    a group and impose no ordering on one another.
    """
    uniq, inv = np.unique(np.asarray(observed), return_inverse=True)
    order = np.argsort(inv, kind="stable")
    edges = np.searchsorted(inv[order], np.arange(uniq.size + 1))
    groups = [order[edges[g] : edges[g + 1]].tolist() for g in range(uniq.size)]
    return inv, groups


def bivariate_loglik(rho: float, sxx: float, sxy: float, syy: float, n: int) -> float:
    """Log density of n iid standard bivariate normal pairs with correlation rho,
    in terms of the sums of squares and cross products."""
    omr = 1.0 - rho * rho
    return -n * _LOG_2PI - 0.5 * n * math.log(omr) - (sxx - 2.0 * rho * sxy + syy) / (2.0 * omr)


def gibbs_sweep(z, z_other, inv, groups, rho: float, sigma: float, rng) -> None:
    """One ordered pass updating every latent in `z` in place.

    Each z[i] is redrawn from Normal(rho * z_other[i], sigma) truncated to the
    band its rank neighbours currently allow. Under the strict-order invariant
    the binding bounds always come from the adjacent rank groups.
    """
    n_groups = len(groups)
    for i in range(len(z)):
        g = inv[i]
        if g == 0:
            lower = -math.inf
        else:
            lower = max(z[j] for j in groups[g - 1])
        if g == n_groups - 1:
            upper = math.inf
        else:
            upper = min(z[j] for j in groups[g + 1])
        z[i] = sample_truncated_normal(rho * z_other[i], sigma, lower, upper, rng)


def mh_step(
    rho: float,
    sxx: float,
    sxy: float,
    syy: float,
    n: int,
    prop_sd: float,
    hastings: bool,
    rng,
) -> tuple[float, bool]:
    """One Metropolis update of rho via a random walk on atanh(rho).

    The acceptance ratio is the bivariate-normal likelihood ratio alone;
    with `hastings` it gains the (1-rho*^2)/(1-rho^2) proposal-asymmetry
    correction, making the uniform prior on rho the exact target.
    """
    zeta = math.atanh(rho)
    zeta_star = zeta + prop_sd * rng.standard_normal()
    rho_star = math.tanh(zeta_star)
    if not -1.0 < rho_star < 1.0:
        return rho, False
    log_ratio = bivariate_loglik(rho_star, sxx, sxy, syy, n) - bivariate_loglik(
        rho, sxx, sxy, syy, n
    )
    if hastings:
        log_ratio += math.log1p(-rho_star * rho_star) - math.log1p(-rho * rho)
    u = rng.random()
    if u <= 0.0:
        accepted = True
    else:
        accepted = math.log(u) < log_ratio
    return (rho_star, True) if accepted else (rho, False)


def run_chain_kernel(
    x_obs: np.ndarray,
    y_obs: np.ndarray,
    z_x0: np.ndarray,
    z_y0: np.ndarray,
    rho0: float,
    total_iterations: int,
    burn_in: int,
    prop_sd: float,
    hastings: bool,
    rng,
) -> tuple[np.ndarray, int]:
    """Run the full chain; returns (rho after every iteration, accepted count
    over post-burn-in iterations)."""
    n = len(z_x0)
    inv_x, groups_x = rank_groups(x_obs)
    inv_y, groups_y = rank_groups(y_obs)
    z_x = [float(v) for v in z_x0]
    z_y = [float(v) for v in z_y0]
    rho = rho0

    rho_all = np.empty(total_iterations, dtype=np.float64)
    accept_count = 0
    for s in range(total_iterations):
        sigma = math.sqrt(1.0 - rho * rho)
        gibbs_sweep(z_x, z_y, inv_x, groups_x, rho, sigma, rng)
        gibbs_sweep(z_y, z_x, inv_y, groups_y, rho, sigma, rng)

        sxx = 0.0
        sxy = 0.0
        syy = 0.0
        for i in range(n):
            sxx += z_x[i] * z_x[i]
            sxy += z_x[i] * z_y[i]
            syy += z_y[i] * z_y[i]

        rho, accepted = mh_step(rho, sxx, sxy, syy, n, prop_sd, hastings, rng)
        if s >= burn_in and accepted:
            accept_count += 1
        rho_all[s] = rho

    return rho_all, accept_count
