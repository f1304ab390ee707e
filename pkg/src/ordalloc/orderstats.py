"""Moments of powers of uniform order statistics.

For ``n`` i.i.d. U(0, 1) draws sorted ascending, the i-th smallest value
``x_(i)`` is Beta(i, n - i + 1).  This module evaluates its density, the
moments ``E[x_(i)**nu]``, the rank distribution ``p(nu)`` built from them,
and the joint moments / covariance / correlation of ``x_(i)**nu`` across
ranks.  Everything is evaluated in log space so large ``n`` does not
underflow the beta function.
"""
import math

import numpy as np
from scipy.special import betaln, digamma, gammaln, polygamma, xlog1py, xlogy

from . import _kernels
from .model import ConvergenceError, DomainError, MomentMatrix

DEFAULT_SERIES_TOL = 1e-14
# below this nu, ln E[x**nu] / nu comes from its Taylor series in nu
SMALL_NU = 1e-3


def _check_rank(i, n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if int(i) != i or not 1 <= i <= n:
        raise DomainError(f"rank {i!r} outside 1..{n}")


def log_beta(alpha, beta):
    """Natural log of the beta function, ``ln B(alpha, beta)``."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(alpha <= 0) or np.any(beta <= 0):
        raise DomainError("log_beta requires alpha > 0 and beta > 0")
    out = betaln(alpha, beta)
    return float(out) if out.ndim == 0 else out


def order_statistic_pdf(x, i, n):
    """Density of the i-th of n sorted uniforms at ``x`` (vectorised in x)."""
    _check_rank(i, n)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("x must lie in [0, 1]")
    logd = xlogy(i - 1, x) + xlog1py(n - i, -x) - betaln(i, n - i + 1)
    out = np.exp(logd)
    return float(out) if out.ndim == 0 else out


def _log_moments(n, nu):
    """``ln E[x_(i)**nu]`` for all ranks i = 1..n."""
    i = np.arange(1, n + 1, dtype=float)
    return betaln(i + nu, n - i + 1) - betaln(i, n - i + 1)


def scaled_log_moments(n, nu):
    """``ln E[x_(i)**nu] / nu`` for i = 1..n, finite down to and at nu = 0.

    For small nu, ``ln G(x + nu) - ln G(x) = sum_k nu**k psi^(k-1)(x) / k!``
    is used directly, which avoids dividing a rounded difference by nu.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"nu must lie in [0, 1], got {nu!r}")
    n = int(n)
    if nu >= SMALL_NU:
        return _log_moments(n, nu) / nu
    i = np.arange(1, n + 1, dtype=float)
    out = digamma(i) - digamma(n + 1.0)
    coef = 1.0
    for k in range(1, 5):
        coef *= nu / (k + 1)
        out = out + coef * (polygamma(k, i) - polygamma(k, n + 1.0))
    return out


def moment_of_order_statistic(i, n, nu):
    """``E[x_(i)**nu] = B(i + nu, n - i + 1) / B(i, n - i + 1)``."""
    _check_rank(i, n)
    if nu <= -1:
        raise DomainError(f"moment requires nu > -1, got {nu!r}")
    return math.exp(betaln(i + nu, n - i + 1) - betaln(i, n - i + 1))


def log_p_vector(n, nu):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if nu <= -1:
        raise DomainError(f"p(nu) requires nu > -1, got {nu!r}")
    return math.log1p(nu) - math.log(n) + _log_moments(int(n), nu)


def p_vector(n, nu):
    """Rank distribution ``p_i(nu) = (1 + nu)/n * E[x_(i)**nu]``.

    Entries are positive and sum to one; they increase with rank for nu > 0.
    """
    return np.exp(log_p_vector(n, nu))


def _series_factor(j, n, nu, tol):
    """Normalised series sum shared by every joint moment with upper rank j."""
    s, terms, ok = _kernels.series_sum(
        float(nu), float(n), float(j), float(tol), _kernels.SERIES_RUN, _kernels.SERIES_MAX_TERMS
    )
    if not ok:
        raise ConvergenceError(
            f"joint-moment series for (j={j}, n={n}, nu={nu}) not below tol={tol} "
            f"after {terms} terms (partial sum {s!r})",
            partial_sum=s,
            terms=terms,
        )
    return s, terms


def _check_nu_open(nu):
    if not 0.0 < nu <= 1.0:
        raise DomainError(f"nu must lie in (0, 1], got {nu!r}")


def joint_moment(i, j, n, nu, tol=DEFAULT_SERIES_TOL):
    """``E[x_(i)**nu * x_(j)**nu]`` for ranks i, j of n sorted uniforms.

    The off-diagonal case sums the binomial series of ``(1 - w)**nu`` term by
    term; it stops after five consecutive terms below ``tol`` relative to the
    partial sum (exactly when nu is an integer), adds a power-law estimate of
    the remainder, and raises :class:`ConvergenceError` past 100 000 terms.
    """
    _check_rank(i, n)
    _check_rank(j, n)
    _check_nu_open(nu)
    if tol <= 0:
        raise DomainError("tol must be positive")
    if i == j:
        return n / (1 + 2 * nu) * float(p_vector(n, 2 * nu)[i - 1])
    i, j = min(i, j), max(i, j)
    log_prefactor = gammaln(n + 1) + gammaln(nu + i) - gammaln(i) - gammaln(n + 1 + nu)
    s, _ = _series_factor(j, n, nu, tol)
    return math.copysign(math.exp(log_prefactor + math.log(abs(s))), s)


def raw_moment_matrix(n, nu, tol=DEFAULT_SERIES_TOL):
    """Matrix M of joint moments ``E[x_(i)**nu x_(j)**nu]``."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    _check_nu_open(nu)
    n = int(n)
    log_e = _log_moments(n, nu)
    m = np.diag(np.exp(_log_moments(n, 2 * nu)))
    for j in range(2, n + 1):
        s, _ = _series_factor(j, n, nu, tol)
        # the series prefactor for row i is exactly E[x_(i)**nu]
        col = np.sign(s) * np.exp(log_e[: j - 1] + math.log(abs(s)))
        m[: j - 1, j - 1] = col
        m[j - 1, : j - 1] = col
    return MomentMatrix(m, "raw-joint")


def covariance_matrix(n, nu, tol=DEFAULT_SERIES_TOL):
    """Covariance of ``(x_(1)**nu, ..., x_(n)**nu)``.

    At nu = 0 every power is identically one, so the result is all zeros.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if nu == 0:
        return MomentMatrix(np.zeros((int(n), int(n))), "covariance")
    m = raw_moment_matrix(n, nu, tol).m
    e = np.exp(_log_moments(int(n), nu))
    v = m - np.outer(e, e)
    return MomentMatrix(0.5 * (v + v.T), "covariance")


def correlation_matrix(n, nu, tol=DEFAULT_SERIES_TOL):
    if nu == 0:
        raise DomainError(
            "correlations are undefined at nu = 0: x**0 is constant, so every variance vanishes"
        )
    v = covariance_matrix(n, nu, tol).m
    d = np.diag(v)
    if np.any(d <= 0):
        raise DomainError("covariance has a non-positive variance; cannot normalise")
    rho = v / np.sqrt(np.outer(d, d))
    np.fill_diagonal(rho, 1.0)
    return MomentMatrix(rho, "correlation")
