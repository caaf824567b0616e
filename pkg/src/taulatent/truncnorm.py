"""Scalar truncated-normal sampling.

Inverse-CDF in the body of the distribution, one-sided exponential rejection
(Robert 1995) once the interval sits more than TAIL_CUT standard deviations
into a tail, where inverse-CDF precision degrades.

The compiled chain kernel re-implements this routine in C. Every arithmetic
expression here is written in the exact order the kernel uses, so both
backends consume the random stream identically and return bit-identical
draws. Edit the two together.
"""

from __future__ import annotations

import math

from scipy.special import ndtr, ndtri

__all__ = ["sample_truncated_normal"]

TAIL_CUT = 6.0
_MIN_UNIFORM = 1.1102230246251565e-16  # 2**-53, smallest nonzero Generator.random()


def _tail_rejection(a: float, b: float, rng) -> float:
    """Standard normal on (a, b), a > 0, via shifted-exponential rejection."""
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        u1 = rng.random()
        if u1 <= 0.0:
            continue
        z = a - math.log(u1) / lam
        u2 = rng.random()
        d = z - lam
        if z < b and u2 <= math.exp(-0.5 * d * d):
            return z


def _std_truncated(a: float, b: float, rng) -> float:
    """Standard normal conditioned on (a, b)."""
    if a > TAIL_CUT:
        return _tail_rejection(a, b, rng)
    if b < -TAIL_CUT:
        return -_tail_rejection(-b, -a, rng)
    u = rng.random()
    if u < _MIN_UNIFORM:
        u = _MIN_UNIFORM
    if a >= 0.0:
        # work on survival probabilities: accurate deep in the right tail
        sa = float(ndtr(-a))
        sb = float(ndtr(-b))
        return -float(ndtri(sb + u * (sa - sb)))
    pa = float(ndtr(a))
    pb = float(ndtr(b))
    return float(ndtri(pa + u * (pb - pa)))


def sample_truncated_normal(mean: float, sd: float, lower: float, upper: float, rng) -> float:
    """One draw from Normal(mean, sd) conditioned on the open interval (lower, upper).

    Parameters
    ----------
    mean, sd : float
        Location and scale; sd must be positive.
    lower, upper : float
        Truncation bounds; -inf / +inf for one-sided or no truncation.
    rng : numpy.random.Generator
        Source of uniforms.

    Returns
    -------
    float
        A value strictly inside (lower, upper).
    """
    if sd <= 0.0:
        raise ValueError(f"sd must be positive, got {sd}")
    if not lower < upper:
        raise ValueError(f"empty truncation interval: [{lower}, {upper}]")
    a = (lower - mean) / sd
    b = (upper - mean) / sd
    z = _std_truncated(a, b, rng)
    x = mean + sd * z
    # rounding at the edges must not escape the open interval
    if x <= lower:
        x = math.nextafter(lower, upper)
    elif x >= upper:
        x = math.nextafter(upper, lower)
    return x
