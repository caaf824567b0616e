# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the latent-normal Gibbs/Metropolis chain.

Mirrors `_chain_py` expression-for-expression: identical random-stream
consumption (numpy's C entry points for the same Generator draws), the same
libm calls, and the same operation order, so both backends produce
bit-identical chains. The build disables FP contraction for the same reason.
Keep the two modules in sync.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, atanh, exp, log, log1p, nextafter, sqrt, tanh
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)
from scipy.special.cython_special cimport ndtr, ndtri

from . import _chain_py

BACKEND_NAME = "compiled"

cdef double _LOG_2PI = 1.8378770664093453
cdef double TAIL_CUT = 6.0
cdef double MIN_UNIFORM = 1.1102230246251565e-16  # 2**-53


cdef double _tail_rejection(double a, double b, bitgen_t *bg):
    cdef double lam, u1, u2, z, d
    lam = 0.5 * (a + sqrt(a * a + 4.0))
    while True:
        u1 = random_standard_uniform(bg)
        if u1 <= 0.0:
            continue
        z = a - log(u1) / lam
        u2 = random_standard_uniform(bg)
        d = z - lam
        if z < b and u2 <= exp(-0.5 * d * d):
            return z


cdef double _std_truncated(double a, double b, bitgen_t *bg):
    cdef double u, sa, sb, pa, pb
    if a > TAIL_CUT:
        return _tail_rejection(a, b, bg)
    if b < -TAIL_CUT:
        return -_tail_rejection(-b, -a, bg)
    u = random_standard_uniform(bg)
    if u < MIN_UNIFORM:
        u = MIN_UNIFORM
    if a >= 0.0:
        sa = ndtr(-a)
        sb = ndtr(-b)
        return -ndtri(sb + u * (sa - sb))
    pa = ndtr(a)
    pb = ndtr(b)
    return ndtri(pa + u * (pb - pa))


cdef double _sample_truncated(double mean, double sd, double lower, double upper,
                              bitgen_t *bg) except? -2.0:
    cdef double a, b, z, x
    if sd <= 0.0:
        raise ValueError(f"sd must be positive, got {sd}")
    if not lower < upper:
        raise ValueError(f"empty truncation interval: [{lower}, {upper}]")
    a = (lower - mean) / sd
    b = (upper - mean) / sd
    z = _std_truncated(a, b, bg)
    x = mean + sd * z
    if x <= lower:
        x = nextafter(lower, upper)
    elif x >= upper:
        x = nextafter(upper, lower)
    return x


cdef double _bivariate_loglik(double rho, double sxx, double sxy, double syy,
                              long n):
    cdef double omr = 1.0 - rho * rho
    return -n * _LOG_2PI - 0.5 * n * log(omr) - (sxx - 2.0 * rho * sxy + syy) / (2.0 * omr)


cdef int _gibbs_sweep(double[::1] z, double[::1] z_other, long[::1] inv,
                      long[::1] members, long[::1] edges, long n_groups,
                      double rho, double sigma, bitgen_t *bg) except -1:
    cdef long i, j, k, g
    cdef double lower, upper, v
    for i in range(z.shape[0]):
        g = inv[i]
        if g == 0:
            lower = -INFINITY
        else:
            lower = -INFINITY
            for k in range(edges[g - 1], edges[g]):
                j = members[k]
                if z[j] > lower:
                    lower = z[j]
        if g == n_groups - 1:
            upper = INFINITY
        else:
            upper = INFINITY
            for k in range(edges[g + 1], edges[g + 2]):
                j = members[k]
                if z[j] < upper:
                    upper = z[j]
        z[i] = _sample_truncated(rho * z_other[i], sigma, lower, upper, bg)
    return 0


def _flat_groups(observed):
    """Per-element group ids plus flattened member/edge arrays, via the same
    grouping the fallback kernel uses."""
    inv, groups = _chain_py.rank_groups(observed)
    inv = np.ascontiguousarray(inv, dtype=np.int64)
    members = np.array([j for g in groups for j in g], dtype=np.int64)
    edges = np.zeros(len(groups) + 1, dtype=np.int64)
    np.cumsum([len(g) for g in groups], out=edges[1:])
    return inv, members, edges, len(groups)


def run_chain_kernel(x_obs, y_obs, z_x0, z_y0, double rho0,
                     long total_iterations, long burn_in, double prop_sd,
                     bint hastings, rng):
    """Run the full chain; returns (rho after every iteration, accepted count
    over post-burn-in iterations)."""
    cdef bitgen_t *bg
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng must be a numpy Generator")
    bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    inv_x_a, members_x_a, edges_x_a, ngx = _flat_groups(x_obs)
    inv_y_a, members_y_a, edges_y_a, ngy = _flat_groups(y_obs)
    cdef long[::1] inv_x = inv_x_a, members_x = members_x_a, edges_x = edges_x_a
    cdef long[::1] inv_y = inv_y_a, members_y = members_y_a, edges_y = edges_y_a
    cdef long n_groups_x = ngx, n_groups_y = ngy

    cdef double[::1] z_x = np.array(z_x0, dtype=np.float64)
    cdef double[::1] z_y = np.array(z_y0, dtype=np.float64)
    cdef long n = z_x.shape[0]

    rho_out = np.empty(total_iterations, dtype=np.float64)
    cdef double[::1] rho_all = rho_out
    cdef long accept_count = 0
    cdef long s, i
    cdef double rho = rho0
    cdef double sigma, sxx, sxy, syy
    cdef double zeta, zeta_star, rho_star, log_ratio, u
    cdef bint accepted

    for s in range(total_iterations):
        sigma = sqrt(1.0 - rho * rho)
        _gibbs_sweep(z_x, z_y, inv_x, members_x, edges_x, n_groups_x, rho, sigma, bg)
        _gibbs_sweep(z_y, z_x, inv_y, members_y, edges_y, n_groups_y, rho, sigma, bg)

        sxx = 0.0
        sxy = 0.0
        syy = 0.0
        for i in range(n):
            sxx += z_x[i] * z_x[i]
            sxy += z_x[i] * z_y[i]
            syy += z_y[i] * z_y[i]

        # Metropolis step, mirroring _chain_py.mh_step
        zeta = atanh(rho)
        zeta_star = zeta + prop_sd * random_standard_normal(bg)
        rho_star = tanh(zeta_star)
        if -1.0 < rho_star < 1.0:
            log_ratio = _bivariate_loglik(rho_star, sxx, sxy, syy, n) - _bivariate_loglik(
                rho, sxx, sxy, syy, n
            )
            if hastings:
                log_ratio += log1p(-rho_star * rho_star) - log1p(-rho * rho)
            u = random_standard_uniform(bg)
            if u <= 0.0:
                accepted = True
            else:
                accepted = log(u) < log_ratio
            if accepted:
                rho = rho_star
        else:
            accepted = False
        if s >= burn_in and accepted:
            accept_count += 1
        rho_all[s] = rho

    return rho_out, accept_count
