"""Closed-form allocations for a risk-neutral investor.

Output of alternative i is ``a * x_i**nu * w_i**(1 - nu)`` with x_i ~ U(0, 1).
Without ranking information the optimum is the equally weighted portfolio
(EWP); when the alternatives can be ranked, the sorted weighted portfolio
(SWP) puts ``w_i`` proportional to ``p_i(nu)**(1/nu)``.
"""
import math

import numpy as np
from scipy.special import digamma, logsumexp

from .model import DomainError, ModelParams, check_weights
from .orderstats import p_vector, scaled_log_moments


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return int(n)


def _check_nu(nu, lo_open=False):
    if lo_open and not 0.0 < nu <= 1.0:
        raise DomainError(f"nu must lie in (0, 1], got {nu!r}")
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"nu must lie in [0, 1], got {nu!r}")


def weight_factors(w, nu):
    """``w_i**(1 - nu)``, with an unfunded alternative contributing zero at nu = 1."""
    w = np.asarray(w, dtype=float)
    if nu == 1.0:
        return (w > 0).astype(float)
    return w ** (1.0 - nu)


def ewp_weights(n):
    n = _check_n(n)
    return np.full(n, 1.0 / n)


def swp_limit_weights(n):
    """nu -> 0 limit of the SWP: ``w_i ~ exp(digamma(i))``."""
    n = _check_n(n)
    lw = digamma(np.arange(1, n + 1, dtype=float))
    return np.exp(lw - logsumexp(lw))


def swp_weights(n, nu):
    """Sorted weighted portfolio ``w_i = p_i**(1/nu) / sum_j p_j**(1/nu)``.

    Evaluated as a softmax of ``ln E[x_(i)**nu] / nu`` (the ``ln((1+nu)/n)``
    shift cancels), which stays finite as nu -> 0; nu = 0 returns the
    analytic limit :func:`swp_limit_weights`.
    """
    n = _check_n(n)
    _check_nu(nu)
    if nu == 0:
        return swp_limit_weights(n)
    lw = scaled_log_moments(n, nu)
    return np.exp(lw - logsumexp(lw))


def two_asset_weights(nu):
    _check_nu(nu, lo_open=True)
    g = (1.0 + nu) ** (1.0 / nu)
    return np.array([1.0 / (1.0 + g), 1.0 / (1.0 + 1.0 / g)])


def two_asset_limit_weights():
    """nu -> 0 limit of the two-asset split, ``(1/(1+e), e/(1+e))``."""
    return np.array([1.0 / (1.0 + math.e), math.e / (1.0 + math.e)])


def rule_of_thumb_weights(n):
    """Allocation for unknown elasticity: ``w_i = 2i / (n(n+1))``."""
    n = _check_n(n)
    i = np.arange(1, n + 1, dtype=float)
    return 2.0 * i / (n * (n + 1))


def expected_output(w, params: ModelParams, sorted=True):
    """Expected total output ``E[c1]`` of allocation ``w``.

    ``sorted=True`` pairs weight i with the i-th smallest success factor;
    ``sorted=False`` is the unranked case where every factor has mean
    ``1/(1+nu)``.
    """
    w = check_weights(w, n=params.n)
    nu = params.nu
    f = weight_factors(w, nu)
    if sorted:
        return params.a * params.n / (1.0 + nu) * float(p_vector(params.n, nu) @ f)
    return params.a / (1.0 + nu) * float(f.sum())


def max_output_case1(params: ModelParams):
    """Best expected output without ranking: ``a n**nu / (1 + nu)``."""
    return params.a * params.n**params.nu / (1.0 + params.nu)


def p_norm(n, nu):
    """``||p(nu)||_{1/nu}``; the max-norm at nu = 0."""
    if nu == 0:
        return float(p_vector(n, 0.0).max())
    return math.exp(math.log1p(nu) - math.log(n) + nu * logsumexp(scaled_log_moments(n, nu)))


def max_output_case2(params: ModelParams):
    """Best expected output with ranking: ``a n/(1+nu) ||p(nu)||_{1/nu}``."""
    nu = params.nu
    return params.a * params.n / (1.0 + nu) * p_norm(params.n, nu)


def dominance_gap(params: ModelParams):
    """``B2 - B1``: the value of the ranking information, never negative."""
    if params.n < 2:
        raise DomainError("dominance gap needs at least two alternatives")
    return max_output_case2(params) - max_output_case1(params)
