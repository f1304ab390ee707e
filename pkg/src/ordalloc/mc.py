"""Seeded Monte Carlo estimates of order-statistic moments and payoffs.

Trials are generated in fixed-size blocks.  Block ``k`` draws from a Philox
counter-based stream keyed by the seed and jumped ``k`` times, so each block
is reproducible on its own; per-block sums are then combined in block order.
The result is therefore bit-identical for any number of worker threads.

The sampler sorts full uniform vectors and shares no code with the analytic
moments in :mod:`ordalloc.orderstats`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .allocator import weight_factors
from .model import DomainError, ModelParams, MomentMatrix, check_weights

BLOCK_SIZE = 1 << 16
DEFAULT_SEED = 42
SE_GATE = 4.0


@dataclass(frozen=True)
class SimulationSpec:
    trials: int
    seed: int
    params: ModelParams
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass(frozen=True)
class EmpiricalSummary:
    mean: float
    variance: float
    standard_error: float
    trials: int

    def agrees_with(self, value, gate=SE_GATE):
        """True when ``value`` lies within ``gate`` standard errors of the mean."""
        return abs(self.mean - value) <= gate * self.standard_error


@dataclass(frozen=True)
class EmpiricalMoments:
    """Sample mean and covariance of ``(x_(1)**nu, ..., x_(n)**nu)``."""

    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    trials: int


def _block_rng(seed, block):
    return np.random.Generator(np.random.Philox(key=seed).jumped(block))


def _block_sizes(trials, block_size):
    full, rest = divmod(trials, block_size)
    return [block_size] * full + ([rest] if rest else [])


def sample_sorted_uniforms(n, count, seed, block_size=BLOCK_SIZE):
    """Yield blocks of ``n`` i.i.d. U(0, 1) draws, each row sorted ascending.

    Blocks hold at most ``block_size`` rows and ``count`` rows in total.
    """
    if n < 1 or count < 1:
        raise DomainError("n and count must be positive")
    for k, m in enumerate(_block_sizes(count, block_size)):
        u = _block_rng(seed, k).random((m, n))
        u.sort(axis=1)
        yield u


def _accumulate(spec: SimulationSpec, sorted_rows, block_size):
    n, nu = spec.params.n, float(spec.params.nu)

    def one(job):
        k, m = job
        u = _block_rng(spec.seed, k).random((m, n))
        return _kernels.block_moments(u, nu, sorted_rows)

    jobs = list(enumerate(_block_sizes(spec.trials, block_size)))
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            parts = list(pool.map(one, jobs))
    else:
        parts = [one(j) for j in jobs]
    s1, s2, s3, s4 = (np.array(p, dtype=float) for p in parts[0])
    for p in parts[1:]:
        s1 += p[0]
        s2 += p[1]
        s3 += p[2]
        s4 += p[3]
    return s1, s2, s3, s4


def empirical_moments(spec: SimulationSpec, sorted=True, block_size=BLOCK_SIZE):
    N = spec.trials
    s1, s2, s3, s4 = _accumulate(spec, sorted, block_size)
    d = s1 / N
    a2, a3, a4 = s2 / N, s3 / N, s4 / N
    c2 = a2 - np.outer(d, d)
    diag = np.diag(a2)
    # fourth central cross-moment E[(y_i - d_i)^2 (y_k - d_k)^2] from raw sums
    m22 = (
        a4
        - 2.0 * d[None, :] * a3
        - 2.0 * d[:, None] * a3.T
        + d[None, :] ** 2 * diag[:, None]
        + d[:, None] ** 2 * diag[None, :]
        + 4.0 * np.outer(d, d) * a2
        - 3.0 * np.outer(d, d) ** 2
    )
    bessel = N / (N - 1) if N > 1 else 1.0
    cov = c2 * bessel
    cov = 0.5 * (cov + cov.T)
    var = np.clip(np.diag(cov), 0.0, None)
    return EmpiricalMoments(
        mean=d,
        mean_se=np.sqrt(var / N),
        cov=cov,
        cov_se=np.sqrt(np.clip(m22 - c2**2, 0.0, None) / N),
        trials=N,
    )


def empirical_moment(i, spec: SimulationSpec, block_size=BLOCK_SIZE):
    """Sample estimate of ``E[x_(i)**nu]`` for the simulated ``n`` and ``nu``."""
    if not 1 <= i <= spec.params.n:
        raise DomainError(f"rank {i} outside 1..{spec.params.n}")
    mom = empirical_moments(spec, True, block_size)
    k = i - 1
    return EmpiricalSummary(
        float(mom.mean[k]), float(mom.cov[k, k]), float(mom.mean_se[k]), mom.trials
    )


def empirical_covariance(spec: SimulationSpec, block_size=BLOCK_SIZE):
    return MomentMatrix(empirical_moments(spec, True, block_size).cov, "covariance")


def simulate_payoffs(w, spec: SimulationSpec, sorted=True, block_size=BLOCK_SIZE):
    """Mean and variance of total output ``c1 = a * sum_i x_i**nu * w_i**(1-nu)``.

    With ``sorted=True`` weight i is paired with the i-th smallest draw.
    """
    params = spec.params
    w = check_weights(w, n=params.n)
    f = weight_factors(w, params.nu)
    mom = empirical_moments(spec, sorted, block_size)
    mean = params.a * float(f @ mom.mean)
    var = max(params.a**2 * float(f @ mom.cov @ f), 0.0)
    return EmpiricalSummary(mean, var, math.sqrt(var / spec.trials), spec.trials)
