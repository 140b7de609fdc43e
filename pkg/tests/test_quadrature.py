import math

import numpy as np
import pytest

from ulcov.errors import ConfigurationError, QuadratureError
from ulcov.quadrature import (
    gauss_laguerre,
    graded_nodes,
    integrate_adaptive,
    integrate_semi_infinite,
)


class TestGaussLaguerre:
    def test_order_two_nodes_and_weights(self):
        rule = gauss_laguerre(2)
        assert rule.nodes == pytest.approx([2.0 - math.sqrt(2.0), 2.0 + math.sqrt(2.0)])
        expected_w = [
            (2.0 + math.sqrt(2.0)) / 4.0,
            (2.0 - math.sqrt(2.0)) / 4.0,
        ]
        assert rule.weights == pytest.approx(expected_w, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 10, 30, 64, 128])
    def test_moment_identities(self, n):
        # int u^k e^{-u} du = k! for k up to the rule's exactness degree.
        rule = gauss_laguerre(n)
        for k in range(0, min(6, 2 * n - 1) + 1):
            approx = float(np.sum(rule.weights * rule.nodes**k))
            assert approx == pytest.approx(math.factorial(k), rel=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 7, 30, 128])
    def test_structure(self, n):
        rule = gauss_laguerre(n)
        assert np.all(rule.nodes > 0.0)
        assert np.all(np.diff(rule.nodes) > 0.0)
        assert np.all(rule.weights > 0.0)
        assert np.sum(rule.weights) == pytest.approx(1.0, abs=1e-12)
        if n >= 2:
            assert float(np.sum(rule.weights * rule.nodes**2)) == pytest.approx(2.0, rel=1e-10)

    def test_polynomial_exactness(self):
        rule = gauss_laguerre(2)
        # degree 3 <= 2n-1: int (u^3 - 2u) e^-u = 6 - 2 = 4 exactly
        assert rule.integrate(lambda u: u**3 - 2 * u) == pytest.approx(4.0, rel=1e-13)

    @pytest.mark.parametrize("n", [0, -3, 129, 2.5])
    def test_order_out_of_range(self, n):
        with pytest.raises(ConfigurationError):
            gauss_laguerre(n)


# Closed-form battery: (integrand, a, b, exact value, rel_tol).  The two
# endpoint-singular cases need a looser target: reaching the singularity
# scale costs one bisection level per halving, and the depth budget is 50.
_BATTERY = [
    (lambda x: np.ones_like(x), 0.0, 1.0, 1.0, 1e-10),
    (lambda x: x**2, 0.0, 1.0, 1.0 / 3.0, 1e-10),
    (lambda x: (1.0 - x / 0.3) * 2.0 * np.pi * x, 0.0, 0.3, math.pi * 0.3**2 / 3.0, 1e-10),
    (np.sin, 0.0, math.pi, 2.0, 1e-10),
    (np.exp, 0.0, 1.0, math.e - 1.0, 1e-10),
    (lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, 2.0, 1e-6),
    (lambda x: np.log(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, 1.0, 1e-8),
    (lambda x: np.exp(-0.5 * x**2) / math.sqrt(2 * math.pi), -6.0, 6.0, math.erf(6 / math.sqrt(2)), 1e-10),
    (lambda x: x**5, -1.0, 2.0, (2.0**6 - 1.0) / 6.0, 1e-10),
    (lambda x: 1.0 / (1.0 + 25.0 * x**2), -1.0, 1.0, (2.0 / 5.0) * math.atan(5.0), 1e-10),
]


class TestAdaptive:
    @pytest.mark.parametrize("f,a,b,exact,rel_tol", _BATTERY)
    def test_battery(self, f, a, b, exact, rel_tol):
        res = integrate_adaptive(f, a, b, rel_tol=rel_tol)
        assert res.value == pytest.approx(exact, rel=10.0 * rel_tol)
        # The reported estimate must bound the true error.
        assert abs(res.value - exact) <= max(res.error, 1e-13 * abs(exact))

    def test_scalar_integrand_supported(self):
        res = integrate_adaptive(lambda x: x * x, 0.0, 1.0, vectorized=False)
        assert res.value == pytest.approx(1.0 / 3.0, rel=1e-10)

    def test_invalid_bounds(self):
        with pytest.raises(ConfigurationError):
            integrate_adaptive(np.sin, 1.0, 0.0)

    def test_nonconvergence_carries_estimate(self):
        # An integrable endpoint singularity cannot meet a tight relative
        # target inside a shallow depth budget.
        with pytest.raises(QuadratureError) as err:
            integrate_adaptive(
                lambda x: x**-0.995, 0.0, 1.0, rel_tol=1e-10, max_depth=20
            )
        assert err.value.estimate > 0.0


class TestSemiInfinite:
    def test_exponential(self):
        assert integrate_semi_infinite(lambda x: np.exp(-x), 0.0).value == pytest.approx(1.0, rel=1e-6)

    def test_inverse_square(self):
        assert integrate_semi_infinite(lambda x: x**-2.0, 1.0).value == pytest.approx(1.0, rel=1e-6)

    def test_radial_tail_mass(self):
        lam, d1 = 10.0, 0.3
        val = integrate_semi_infinite(
            lambda x: np.exp(-math.pi * lam * x**2) * 2 * math.pi * lam * x, d1
        ).value
        assert val == pytest.approx(math.exp(-math.pi * lam * d1**2), rel=1e-6)


class TestChangeOfVariable:
    """Shifting a radial integral onto the exponential weight and applying
    the Laguerre rule must reproduce the closed form."""

    @pytest.mark.parametrize("lam,d1", [(1.0, 0.3), (10.0, 0.3), (100.0, 0.05)])
    def test_identity(self, lam, d1):
        a = math.pi * lam * d1 * d1
        # int_d1^inf 2 pi lam r^3 exp(-pi lam r^2) dr = e^-a (a + 1) / (pi lam)
        exact = math.exp(-a) * (a + 1.0) / (math.pi * lam)
        rule = gauss_laguerre(30)
        # r^2 = (v + a) / (pi lam) after v = pi lam r^2 - a
        approx = math.exp(-a) * float(
            np.sum(rule.weights * (rule.nodes + a) / (math.pi * lam))
        )
        assert approx == pytest.approx(exact, rel=1e-10)
        # and the untransformed integral agrees too
        direct = integrate_semi_infinite(
            lambda r: 2 * math.pi * lam * r**3 * np.exp(-math.pi * lam * r**2),
            d1,
            rel_tol=1e-10,
        ).value
        assert direct == pytest.approx(exact, rel=1e-8)

    def test_smooth_non_polynomial(self):
        lam, d1 = 10.0, 0.3
        a = math.pi * lam * d1 * d1

        def g(r):
            return 1.0 / (1.0 + r)

        direct = integrate_semi_infinite(
            lambda r: g(r) * np.exp(-math.pi * lam * r**2) * 2 * math.pi * lam * r,
            d1,
            rel_tol=1e-12,
        ).value
        rule = gauss_laguerre(40)
        r_nodes = np.sqrt((rule.nodes + a) / (math.pi * lam))
        transformed = math.exp(-a) * float(np.sum(rule.weights * g(r_nodes)))
        assert transformed == pytest.approx(direct, rel=1e-10)


class TestGradedNodes:
    def test_integrates_smooth(self):
        x, w = graded_nodes(0.0, 2.0, panels=6, order=8, grade="left")
        assert float(np.sum(w * x**3)) == pytest.approx(4.0, rel=1e-12)

    def test_resolves_boundary_layer(self):
        # exp decay with scale 1e-3 of the interval needs the dyadic grading
        x, w = graded_nodes(0.0, 1.0, panels=12, order=8, grade="left")
        val = float(np.sum(w * np.exp(-x / 1e-3) / 1e-3))
        assert val == pytest.approx(1.0, rel=1e-8)
