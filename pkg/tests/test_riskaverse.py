import numpy as np
import pytest

from ordalloc import (
    DomainError,
    ModelParams,
    OptimizerConfig,
    covariance_matrix,
    ewp_weights,
    expected_output,
    minimum_variance_weights,
    optimize_mean_variance,
    p_vector,
    rule_of_thumb_weights,
    swp_weights,
    utility,
    variance_of_output,
)
from ordalloc.riskaverse import Objective, RestartResult, build_report, projected_ascent, select_best
from oracles import grid_search, uniform_covariance

FLOOR = OptimizerConfig().floor


def oracle(n, nu, b, min_var=False):
    V = covariance_matrix(n, nu).m
    coefs = (0.0, 1.0) if min_var else (1.0, 0.5 * b)
    return grid_search(n, nu, 1.0, p_vector(n, nu), V, *coefs, floor=FLOOR)


def fd_gradient(f, w, h=1e-6):
    g = np.empty_like(w)
    for k in range(w.size):
        e = np.zeros_like(w)
        e[k] = h
        g[k] = (f(w + e) - f(w - e)) / (2 * h)
    return g


class TestVariance:
    def test_zero_covariance(self):
        p = ModelParams(n=3, nu=0.5)
        assert variance_of_output(ewp_weights(3), p, np.zeros((3, 3))) == 0.0

    def test_single_sqrt(self):
        p = ModelParams(n=1, nu=0.5)
        assert variance_of_output([1.0], p) == pytest.approx(0.5 - (2 / 3) ** 2, rel=1e-12)

    def test_ewp_uniform(self):
        p = ModelParams(n=4, nu=1.0)
        assert variance_of_output(ewp_weights(4), p) == pytest.approx(uniform_covariance(4).sum(), rel=1e-13)

    def test_wrong_kind_or_shape(self):
        from ordalloc import correlation_matrix

        p = ModelParams(n=4, nu=0.5)
        with pytest.raises(DomainError):
            variance_of_output(ewp_weights(4), p, correlation_matrix(4, 0.5))
        with pytest.raises(DomainError):
            variance_of_output(ewp_weights(4), p, np.eye(3))


class TestUtility:
    def test_risk_neutral(self):
        p = ModelParams(n=3, nu=0.4)
        w = swp_weights(3, 0.4)
        assert utility(w, p) == expected_output(w, p)

    def test_b_two(self):
        p = ModelParams(n=3, nu=0.4, b=2.0)
        w = swp_weights(3, 0.4)
        assert utility(w, p) == pytest.approx(expected_output(w, p) - variance_of_output(w, p), rel=1e-14)

    def test_penalty_lowers_utility(self):
        w = swp_weights(3, 0.4)
        assert utility(w, ModelParams(n=3, nu=0.4, b=0.1)) < utility(w, ModelParams(n=3, nu=0.4))

    def test_report_invariant(self):
        p = ModelParams(n=4, nu=0.6, b=3.0)
        r = build_report(swp_weights(4, 0.6), p, "SWP")
        assert r.variance >= 0
        assert r.utility == pytest.approx(r.expected_output - 0.5 * p.b * r.variance, abs=1e-10)
        assert r.as_dict()["method"] == "SWP"


class TestGradient:
    def test_finite_differences(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 6))
            nu = float(rng.choice([rng.uniform(0.05, 0.95), 1.0]))
            b = float(rng.uniform(0.0, 10.0))
            p = ModelParams(n=n, nu=nu, b=b)
            obj = Objective(p, covariance_matrix(n, nu), 1.0, 0.5 * b)
            w = 0.5 * rng.dirichlet(np.ones(n)) + 0.5 / n
            g = obj.grad(w)
            g_fd = fd_gradient(obj.value, w)
            worst = max(worst, np.linalg.norm(g - g_fd) / np.linalg.norm(g))
        assert worst < 1e-5

    def test_value_matches_public_utility(self):
        p = ModelParams(n=3, nu=0.35, b=4.0)
        V = covariance_matrix(3, 0.35)
        w = np.array([0.2, 0.3, 0.5])
        assert Objective(p, V, 1.0, 2.0).value(w) == pytest.approx(utility(w, p), rel=1e-13)


class TestMeanVariance:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    @pytest.mark.parametrize("nu", [0.25, 0.5, 0.75, 1.0])
    def test_risk_neutral_is_swp(self, n, nu):
        out = optimize_mean_variance(ModelParams(n=n, nu=nu))
        assert out.converged
        np.testing.assert_allclose(out.report.weights, swp_weights(n, nu), atol=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("nu", [0.25, 0.5, 1.0])
    @pytest.mark.parametrize("b", [0.0, 1.0, 10.0])
    def test_grid_oracle(self, n, nu, b):
        out = optimize_mean_variance(ModelParams(n=n, nu=nu, b=b))
        assert out.converged
        assert out.stationarity <= OptimizerConfig().tolerance
        np.testing.assert_allclose(out.report.weights, oracle(n, nu, b), atol=1e-3)

    def test_nu_one_limit_values(self):
        # at nu = 1 the optimum is w_i proportional to p_i / 2 - 2 (b/2) (V 1)_i
        out = optimize_mean_variance(ModelParams(n=2, nu=1.0, b=1.0))
        np.testing.assert_allclose(out.report.weights, [0.3, 0.7], atol=1e-8)
        out = optimize_mean_variance(ModelParams(n=3, nu=1.0, b=0.0))
        np.testing.assert_allclose(out.report.weights, rule_of_thumb_weights(3), atol=1e-8)

    @pytest.mark.parametrize("n,nu", [(2, 0.25), (3, 0.5), (4, 0.75), (5, 1.0)])
    def test_monotone_in_b(self, n, nu):
        variances, means = [], []
        for b in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0):
            r = optimize_mean_variance(ModelParams(n=n, nu=nu, b=b)).report
            variances.append(r.variance)
            means.append(r.expected_output)
        assert np.all(np.diff(variances) <= 1e-8)
        assert np.all(np.diff(means) <= 1e-8)

    @pytest.mark.parametrize("n,nu,b", [(3, 0.3, 2.0), (5, 0.7, 20.0), (4, 1.0, 5.0)])
    def test_dominates_closed_forms(self, n, nu, b):
        p = ModelParams(n=n, nu=nu, b=b)
        r = optimize_mean_variance(p).report
        assert r.utility >= utility(ewp_weights(n), p) - 1e-8
        assert r.utility >= utility(swp_weights(n, nu), p) - 1e-8

    def test_feasible(self):
        r = optimize_mean_variance(ModelParams(n=6, nu=0.4, b=50.0)).report
        assert r.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(r.weights >= FLOOR - 1e-15)

    def test_large_b_approaches_min_variance(self):
        for n, nu in [(2, 0.5), (3, 0.25)]:
            big = optimize_mean_variance(ModelParams(n=n, nu=nu, b=1e6)).report.weights
            np.testing.assert_allclose(big, oracle(n, nu, 0.0, min_var=True), atol=1e-3)

    def test_threads_do_not_change_result(self):
        p = ModelParams(n=4, nu=0.5, b=3.0)
        a = optimize_mean_variance(p, OptimizerConfig(workers=1)).report.weights
        b = optimize_mean_variance(p, OptimizerConfig(workers=4)).report.weights
        np.testing.assert_array_equal(a, b)

    def test_reports_restarts(self):
        out = optimize_mean_variance(ModelParams(n=3, nu=0.5, b=1.0), OptimizerConfig(restarts=5))
        assert len(out.restarts) == 5
        assert out.starts_agreeing >= 1
        assert {r.start for r in out.restarts} >= {"EWP", "SWP"}

    def test_unconverged_is_reported(self):
        out = optimize_mean_variance(ModelParams(n=5, nu=0.3, b=5.0), OptimizerConfig(max_iterations=1, restarts=1))
        assert not out.converged
        assert out.stationarity > OptimizerConfig().tolerance

    def test_nu_zero_rejected(self):
        with pytest.raises(DomainError):
            optimize_mean_variance(ModelParams(n=3, nu=0.0, b=1.0))

    def test_single_alternative(self):
        out = optimize_mean_variance(ModelParams(n=1, nu=0.5, b=1.0))
        np.testing.assert_array_equal(out.report.weights, [1.0])


class TestMinimumVariance:
    def test_single(self):
        np.testing.assert_array_equal(minimum_variance_weights(ModelParams(n=1, nu=0.5)).report.weights, [1.0])

    def test_two_at_one_against_grid(self):
        w = minimum_variance_weights(ModelParams(n=2, nu=1.0)).report.weights
        np.testing.assert_allclose(w, oracle(2, 1.0, 0.0, min_var=True), atol=1e-3)

    @pytest.mark.parametrize("n,nu", [(2, 0.5), (3, 0.25), (4, 0.8)])
    def test_below_closed_forms(self, n, nu):
        p = ModelParams(n=n, nu=nu)
        v = minimum_variance_weights(p).report.variance
        assert v <= variance_of_output(ewp_weights(n), p) + 1e-12
        assert v <= variance_of_output(swp_weights(n, nu), p) + 1e-12


class TestSelection:
    def _r(self, w, f):
        return RestartResult("x", np.array(w), f, True, 1, 0.0)

    def test_highest_wins(self):
        assert select_best([self._r([0.5, 0.5], 1.0), self._r([0.2, 0.8], 2.0)]).objective == 2.0

    def test_tie_goes_to_lexicographic_minimum(self):
        best = select_best([self._r([0.7, 0.3], 1.0), self._r([0.3, 0.7], 1.0 + 1e-12)])
        np.testing.assert_array_equal(best.weights, [0.3, 0.7])


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs", [dict(tolerance=0.0), dict(restarts=0), dict(max_iterations=0), dict(floor=-1e-3)]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            OptimizerConfig(**kwargs)

    def test_floor_too_large(self):
        with pytest.raises(DomainError):
            optimize_mean_variance(ModelParams(n=4, nu=0.5, b=1.0), OptimizerConfig(floor=0.25))

    def test_ascent_from_corner(self):
        p = ModelParams(n=3, nu=0.5, b=0.0)
        obj = Objective(p, covariance_matrix(3, 0.5), 1.0, 0.0)
        w, f, ok, its, stat = projected_ascent(obj, np.array([1.0, 0.0, 0.0]), OptimizerConfig())
        assert ok
        np.testing.assert_allclose(w, swp_weights(3, 0.5), atol=1e-6)
