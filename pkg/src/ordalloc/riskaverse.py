"""Mean-variance allocation for a risk-averse investor.

Utility is ``E[c1] - b/2 * Var[c1]`` over the sorted alternatives.  There is
no closed form once ``b > 0``, so the weights are found by projected
gradient ascent on the long-only simplex (with a small weight floor that
keeps ``w**(-nu)`` finite), restarted from several feasible points.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .allocator import ewp_weights, expected_output, swp_weights, weight_factors
from .model import AllocationReport, DomainError, ModelParams, MomentMatrix, check_weights
from .orderstats import covariance_matrix, p_vector

log = logging.getLogger(__name__)

TIE_RTOL = 1e-9
AGREE_ATOL = 1e-6
_ROUNDOFF = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class OptimizerConfig:
    tolerance: float = 1e-10
    max_iterations: int = 20_000
    restarts: int = 8
    floor: float = 1e-9
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.floor < 0:
            raise DomainError("floor must be non-negative")

    def check_floor(self, n):
        if not self.floor < 1.0 / n:
            raise DomainError(f"floor {self.floor} leaves no room for {n} alternatives")


@dataclass(frozen=True)
class RestartResult:
    start: str
    weights: np.ndarray
    objective: float
    converged: bool
    iterations: int
    stationarity: float


@dataclass(frozen=True)
class OptimizationOutcome:
    report: AllocationReport
    converged: bool
    iterations: int
    stationarity: float
    starts_agreeing: int
    restarts: tuple = field(default=(), repr=False)


def _check_cov(V, n):
    if isinstance(V, MomentMatrix):
        if V.kind != "covariance":
            raise DomainError(f"expected a covariance matrix, got kind {V.kind!r}")
        V = V.m
    V = np.asarray(V, dtype=float)
    if V.shape != (n, n):
        raise DomainError(f"covariance shape {V.shape} does not match n={n}")
    return V


def variance_of_output(w, params: ModelParams, V=None):
    """``Var[c1] = a**2 * f' V f`` with ``f_i = w_i**(1 - nu)``."""
    w = check_weights(w, n=params.n)
    V = covariance_matrix(params.n, params.nu) if V is None else V
    V = _check_cov(V, params.n)
    f = weight_factors(w, params.nu)
    return max(params.a**2 * float(f @ V @ f), 0.0)


def utility(w, params: ModelParams, V=None):
    """Mean-variance utility ``E[c1] - b/2 Var[c1]`` of the sorted allocation."""
    mean = expected_output(w, params, sorted=True)
    if params.b == 0:
        return mean
    return mean - 0.5 * params.b * variance_of_output(w, params, V)


def build_report(w, params: ModelParams, method, V=None, notes=()):
    if V is None and params.nu > 0:
        V = covariance_matrix(params.n, params.nu)
    elif V is None:
        V = np.zeros((params.n, params.n))
    w = check_weights(w, n=params.n)
    mean = expected_output(w, params, sorted=True)
    var = variance_of_output(w, params, V)
    return AllocationReport(
        weights=w,
        expected_output=mean,
        variance=var,
        utility=mean - 0.5 * params.b * var,
        method=method,
        params=params,
        notes=tuple(notes),
    )


class Objective:
    """``mean_coef * E[c1] - var_coef * Var[c1]`` as a function of the weights.

    At nu = 1 every interior allocation yields the same mean and variance, so
    the objective is replaced by its leading-order term as nu -> 1 from below,
    ``sum_i c_i ln w_i``; its maximiser is the limit of the nu < 1 optima.
    """

    def __init__(self, params: ModelParams, V, mean_coef, var_coef):
        self.params = params
        self.nu = params.nu
        self.V = _check_cov(V, params.n)
        a, n, nu = params.a, params.n, params.nu
        self.mean_vec = mean_coef * a * n / (1.0 + nu) * p_vector(n, nu)
        self.quad = var_coef * a * a * self.V
        if nu == 1.0:
            self.log_coef = self.mean_vec - 2.0 * self.quad.sum(axis=1)

    def value(self, w):
        if self.nu == 1.0:
            return float(self.log_coef @ np.log(w))
        y = w ** (1.0 - self.nu)
        return float(self.mean_vec @ y - y @ self.quad @ y)

    def grad(self, w):
        if self.nu == 1.0:
            return self.log_coef / w
        y = w ** (1.0 - self.nu)
        return (1.0 - self.nu) * w ** (-self.nu) * (self.mean_vec - 2.0 * self.quad @ y)


def _stationarity(w, g, floor):
    return float(np.abs(_kernels.project_simplex(w + g, floor) - w).max())


def projected_ascent(obj: Objective, w0, cfg: OptimizerConfig):
    """Maximise ``obj`` over the floored simplex from ``w0``.

    Barzilai-Borwein trial steps with Armijo backtracking along the
    projection arc.  Returns ``(w, value, converged, iterations, stationarity)``.
    """
    floor = cfg.floor
    w = _kernels.project_simplex(np.asarray(w0, dtype=float), floor)
    f = obj.value(w)
    g = obj.grad(w)
    step = 1.0 / max(float(np.abs(g).max()), 1e-12)
    stat = _stationarity(w, g, floor)
    for it in range(cfg.max_iterations):
        if stat <= cfg.tolerance:
            return w, f, True, it, stat
        t = step
        while True:
            w_new = _kernels.project_simplex(w + t * g, floor)
            d = w_new - w
            f_new = obj.value(w_new)
            # slack of a few ulps so the search does not stall on round-off
            if f_new >= f + 1e-4 * float(g @ d) - _ROUNDOFF * (1.0 + abs(f)):
                break
            t *= 0.5
            if t < 1e-30:
                # no ascent possible at working precision
                return w, f, stat <= cfg.tolerance, it, stat
        g_new = obj.grad(w_new)
        sy = float(d @ (g_new - g))
        step = float(d @ d) / -sy if sy < 0 else 2.0 * t
        step = min(max(step, 1e-12), 1e12)
        w, f, g = w_new, f_new, g_new
        stat = _stationarity(w, g, floor)
    return w, f, stat <= cfg.tolerance, cfg.max_iterations, stat


def _starts(params: ModelParams, cfg: OptimizerConfig):
    starts = [("EWP", ewp_weights(params.n)), ("SWP", swp_weights(params.n, params.nu))]
    rng = np.random.default_rng(cfg.seed)
    k = 0
    while len(starts) < cfg.restarts:
        starts.append((f"dirichlet-{k}", rng.dirichlet(np.ones(params.n))))
        k += 1
    return starts[: cfg.restarts]


def select_best(results):
    """Highest objective; near-ties go to the lexicographically smallest weights."""
    best = max(r.objective for r in results)
    tie = TIE_RTOL * max(1.0, abs(best))
    tied = [r for r in results if r.objective >= best - tie]
    return min(tied, key=lambda r: tuple(r.weights))


def _solve(params: ModelParams, cfg: OptimizerConfig, mean_coef, var_coef, method):
    if not 0.0 < params.nu <= 1.0:
        raise DomainError(f"risk-averse optimisation needs nu in (0, 1], got {params.nu}")
    cfg = cfg or OptimizerConfig()
    n = params.n
    if n == 1:
        w = np.ones(1)
        return OptimizationOutcome(build_report(w, params, method), True, 0, 0.0, cfg.restarts)
    cfg.check_floor(n)
    V = covariance_matrix(n, params.nu)
    obj = Objective(params, V, mean_coef, var_coef)

    def run(start):
        label, w0 = start
        w, f, ok, its, stat = projected_ascent(obj, w0, cfg)
        return RestartResult(label, w, f, ok, its, stat)

    starts = _starts(params, cfg)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    best = select_best(results)
    agreeing = sum(np.abs(r.weights - best.weights).max() <= AGREE_ATOL for r in results)
    if not best.converged:
        log.warning(
            "%s solver did not converge for %s (stationarity %.3g after %d iterations)",
            method, params, best.stationarity, best.iterations,
        )
    return OptimizationOutcome(
        report=build_report(best.weights, params, method, V),
        converged=best.converged,
        iterations=best.iterations,
        stationarity=best.stationarity,
        starts_agreeing=int(agreeing),
        restarts=tuple(results),
    )


def optimize_mean_variance(params: ModelParams, cfg: OptimizerConfig | None = None):
    """Long-only weights maximising ``E[c1] - b/2 Var[c1]``."""
    return _solve(params, cfg, 1.0, 0.5 * params.b, "mean-variance")


def minimum_variance_weights(params: ModelParams, cfg: OptimizerConfig | None = None):
    """Long-only weights minimising ``Var[c1]``."""
    return _solve(params, cfg, 0.0, 1.0, "min-variance")
