import math

import numpy as np
import pytest

from ordalloc.model import ConvergenceError
from ordalloc.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, integrate, integrate_triangle


class TestRule:
    def test_gauss_part_matches_legendre(self):
        x, w = np.polynomial.legendre.leggauss(7)
        np.testing.assert_allclose(NODES[1::2], x, atol=1e-15)
        np.testing.assert_allclose(GAUSS_WEIGHTS[1::2], w, atol=1e-15)
        assert np.all(GAUSS_WEIGHTS[::2] == 0)

    @pytest.mark.parametrize("deg", range(0, 23))
    def test_kronrod_exact_to_degree_22(self, deg):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        assert KRONROD_WEIGHTS @ NODES**deg == pytest.approx(exact, abs=1e-14)


class TestIntegrate:
    @pytest.mark.parametrize(
        "f,a,b,exact",
        [
            (np.sin, 0.0, math.pi, 2.0),
            (np.exp, -1.0, 2.0, math.e**2 - math.exp(-1)),
            (lambda x: x**0.25, 0.0, 1.0, 0.8),
            (lambda x: 1 / np.sqrt(x), 0.0, 1.0, 2.0),
            (lambda x: np.log(x), 0.0, 1.0, -1.0),
        ],
    )
    def test_known_integrals(self, f, a, b, exact):
        value, err = integrate(f, a, b, abs_tol=1e-10)
        assert value == pytest.approx(exact, abs=1e-8)
        assert err <= 1e-9

    def test_reversed_limits(self):
        assert integrate(np.cos, 1.0, 0.0)[0] == pytest.approx(-math.sin(1.0), abs=1e-12)

    def test_cap_raises(self):
        with pytest.raises(ConvergenceError):
            integrate(lambda x: np.sin(1 / x), 1e-6, 1.0, abs_tol=1e-14, max_intervals=10)


class TestTriangle:
    def test_area(self):
        assert integrate_triangle(lambda u, v: np.ones_like(u))[0] == pytest.approx(0.5, abs=1e-12)

    def test_uv_moment(self):
        # density 2 on 0 < u < v < 1, E[uv] = 1/4
        assert integrate_triangle(lambda u, v: 2 * u * v)[0] == pytest.approx(0.25, abs=1e-12)

    def test_kink_on_diagonal(self):
        # integral of sqrt(v - u) over the triangle = 4/15
        val = integrate_triangle(lambda u, v: np.sqrt(v - u), abs_tol=1e-10)[0]
        assert val == pytest.approx(4 / 15, abs=1e-9)
