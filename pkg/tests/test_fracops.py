import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fracbvp.fracops import (
    FracOrder,
    caputo_limit_probe,
    left_rl_derivative,
    left_rl_integral,
    right_caputo_derivative,
    right_rl_integral,
)
from fracbvp.grid import GridFunction, make_grid, sample
from fracbvp.validate import power_law_integral, reference_frac_integral

from .conftest import sampled

ORDERS = [0.1, 0.3, 0.5, 0.7, 0.9]


def brute_right_caputo_of_interpolant(values, mu, i):
    """Right Caputo derivative of the piecewise-linear interpolant at node i,
    integrating the kernel numerically cell by cell."""
    n = len(values)
    h = 1.0 / (n - 1)
    ti = i * h
    total = 0.0
    for j in range(i, n - 1):
        slope = (values[j + 1] - values[j]) / h
        a, b = j * h, (j + 1) * h
        w = integrate.quad(lambda s: (s - ti) ** -mu, a, b, weight=None, limit=100)[0]
        total += slope * w
    return -total / math.gamma(1 - mu)


@pytest.mark.parametrize("mu", [0.0, 1.0, -0.2, 1.5])
def test_fracorder_rejects(mu):
    with pytest.raises(ValueError):
        FracOrder(mu)


class TestLeftIntegral:
    @pytest.mark.parametrize("mu", ORDERS)
    def test_constant(self, mu):
        v = left_rl_integral(sampled(lambda t: np.ones_like(t), 65), mu)
        expected = v.t**mu / math.gamma(mu + 1)
        np.testing.assert_allclose(v.values, expected, rtol=1e-12, atol=1e-15)
        assert v[0] == 0.0

    @pytest.mark.parametrize("q", ORDERS)
    def test_linear_bracket_generator(self, q):
        A = 0.01
        v = left_rl_integral(sampled(lambda t: A * (1 - t), 129), q)
        t = v.t
        expected = A * t**q * (q + 1 - t) / math.gamma(q + 2)
        np.testing.assert_allclose(v.values, expected, rtol=1e-11, atol=1e-17)

    def test_zero(self):
        assert np.all(left_rl_integral(sampled(lambda t: 0 * t, 9), 0.4).values == 0)

    @pytest.mark.parametrize("mu", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("nu", [0.5, 1.0, 2.0])
    def test_power_law(self, mu, nu):
        v = left_rl_integral(sampled(lambda t: t**nu, 1025), mu)
        exact = power_law_integral(v.t, nu, mu)
        assert np.max(np.abs(v.values - exact)) / np.max(np.abs(exact)) <= 1e-3

    @pytest.mark.parametrize("mu", [0.25, 0.6])
    def test_agrees_with_reference_on_smooth_data(self, mu):
        f = lambda s: np.exp(-s) * np.cos(2 * s)  # noqa: E731
        v = left_rl_integral(sampled(f, 1025), mu)
        for i in (100, 300, 512, 800, 1024):
            ref = reference_frac_integral(f, mu, "left", float(v.t[i]))
            assert v[i] == pytest.approx(ref, abs=2e-6)

    def test_second_order_on_smooth_data(self):
        f = lambda s: np.exp(s)  # noqa: E731
        errs = []
        for n in (65, 129, 257):
            v = left_rl_integral(sampled(f, n), 0.5)
            errs.append(abs(v[-1] - reference_frac_integral(f, 0.5, "left", 1.0)))
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


class TestRightIntegral:
    @pytest.mark.parametrize("mu", ORDERS)
    def test_constant(self, mu):
        v = right_rl_integral(sampled(lambda t: np.ones_like(t), 65), mu)
        np.testing.assert_allclose(
            v.values, (1 - v.t) ** mu / math.gamma(mu + 1), rtol=1e-12, atol=1e-15
        )
        assert v[-1] == 0.0

    def test_linear_half_order(self):
        v = right_rl_integral(sampled(lambda t: 1 - t, 33), 0.5)
        expected = (1 - v.t) ** 1.5 / math.gamma(2.5)
        np.testing.assert_allclose(v.values, expected, rtol=1e-12, atol=1e-15)
        for i in (0, 7, 20):
            ref = reference_frac_integral(lambda s: 1 - s, 0.5, "right", float(v.t[i]))
            assert ref == pytest.approx(expected[i], rel=1e-9)

    def test_reflection_is_exact(self, rng):
        g = make_grid(101)
        data = rng.normal(size=101)
        left = left_rl_integral(GridFunction(g, data[::-1]), 0.35).values[::-1]
        right = right_rl_integral(GridFunction(g, data), 0.35).values
        assert np.array_equal(left, right)

    def test_t_squared_beta_expansion(self):
        # int_0^{L} w^{mu-1} (t+w)^2 dw / Gamma(mu), L = 1 - t
        mu, t = 0.3, 0.4
        L = 1 - t
        exact = (t * t * L**mu / mu + 2 * t * L ** (mu + 1) / (mu + 1) + L ** (mu + 2) / (mu + 2)) / math.gamma(mu)
        v = right_rl_integral(sampled(lambda s: s**2, 1001), mu)
        assert v[400] == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("op", [left_rl_integral, right_rl_integral])
def test_kernel_positivity(op, rng):
    g = make_grid(200)
    data = np.abs(rng.normal(size=200))
    data[rng.integers(0, 200, 50)] = 0.0
    for mu in ORDERS:
        assert np.all(op(GridFunction(g, data), mu).values >= 0)


class TestRightCaputo:
    @pytest.mark.parametrize("mu", ORDERS)
    def test_constant_is_annihilated(self, mu):
        v = right_caputo_derivative(sampled(lambda t: 0 * t + 3.5, 64), mu)
        assert np.all(v.values == 0)

    @pytest.mark.parametrize("r", [0.5, 0.75, 0.9, 0.99])
    def test_linear_closed_form(self, r):
        A = 0.01
        v = right_caputo_derivative(sampled(lambda t: A * (1 - t), 257), r)
        expected = A * (1 - v.t) ** (1 - r) / math.gamma(2 - r)
        np.testing.assert_allclose(v.values, expected, rtol=1e-11, atol=1e-17)
        assert v[-1] == 0.0

    def test_matches_brute_force_on_interpolant(self, rng):
        data = rng.normal(size=17)
        v = right_caputo_derivative(GridFunction(make_grid(17), data), 0.4)
        for i in (0, 5, 15):
            assert v[i] == pytest.approx(brute_right_caputo_of_interpolant(data, 0.4, i), rel=1e-8)

    def test_approaches_minus_derivative(self):
        g = sampled(lambda t: t**2, 1025)
        interior = slice(1, -1)
        dist = [
            np.max(np.abs(right_caputo_derivative(g, r).values + 2 * g.t)[interior])
            for r in (0.9, 0.99, 0.999)
        ]
        assert dist[0] > dist[1] > dist[2]


class TestLeftDerivative:
    @pytest.mark.parametrize("mu", [0.3, 0.5, 0.7])
    def test_power_law_gives_constant(self, mu):
        d = left_rl_derivative(sampled(lambda t: t**mu, 4097), mu)
        # L1 is inaccurate for the t**mu cusp at the first few nodes
        far = d.t >= 0.25
        np.testing.assert_allclose(d.values[far], math.gamma(mu + 1), rtol=2e-3)
        assert not d.singular_at_zero

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
    def test_inverts_bracket(self, q):
        A = 0.01
        alpha = sampled(lambda t: A * t**q * (q + 1 - t) / math.gamma(q + 2), 4097)
        d = left_rl_derivative(alpha, q)
        far = alpha.t >= 0.25
        np.testing.assert_allclose(d.values[far], A * (1 - alpha.t[far]), atol=5e-5 * A)

    def test_zero(self):
        d = left_rl_derivative(sampled(lambda t: 0 * t, 9), 0.5)
        assert np.all(d.values == 0) and not d.singular_at_zero

    def test_singular_start_is_flagged(self):
        d = left_rl_derivative(sampled(lambda t: 1 + t, 65), 0.5)
        assert d.singular_at_zero
        # D^mu 1 = t^-mu / Gamma(1-mu), D^mu t = t^(1-mu) / Gamma(2-mu)
        t = d.t[1:]
        expected = t**-0.5 / math.gamma(0.5) + t**0.5 / math.gamma(1.5)
        np.testing.assert_allclose(d.values[1:], expected, rtol=1e-12)

    def test_linear_is_exact(self):
        d = left_rl_derivative(sampled(lambda t: t, 33), 0.5)
        np.testing.assert_allclose(d.values, d.t**0.5 / math.gamma(1.5), rtol=1e-12)


class TestLimitProbe:
    def test_constant(self):
        g = sampled(lambda t: 0 * t + 2.0, 33)
        dg = sampled(lambda t: 0 * t, 33)
        assert [d for _, d in caputo_limit_probe(g, dg, [0.5, 0.9])] == [0.0, 0.0]

    def test_linear_closed_form(self):
        g = sampled(lambda t: 1 - t, 257)
        dg = sampled(lambda t: 0 * t - 1, 257)
        table = caputo_limit_probe(g, dg, [0.6, 0.9, 0.99])
        t = g.t[1:-1]
        for r, dist in table:
            assert dist == pytest.approx(np.max(np.abs((1 - t) ** (1 - r) / math.gamma(2 - r) - 1)), rel=1e-10)
        assert table[0][1] > table[1][1] > table[2][1]

    def test_rejects_unordered(self):
        g = sampled(lambda t: t, 9)
        with pytest.raises(ValueError):
            caputo_limit_probe(g, g, [0.9, 0.5])


def _composition_error(f, mu, n):
    g = sampled(f, n)
    back = right_rl_integral(right_caputo_derivative(g, mu), mu)
    return np.max(np.abs(back.values - (g.values - g[-1])))


@pytest.mark.parametrize("mu", [0.3, 0.5, 0.7])
@pytest.mark.parametrize(
    "f", [lambda t: t, lambda t: t**2 - 0.5, lambda t: t**3 - t], ids=["deg1", "deg2", "deg3"]
)
def test_right_composition_converges(f, mu):
    errs = [_composition_error(f, mu, n) for n in (257, 513, 1025, 2049)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    # first order, approached from below
    assert np.all(orders >= 0.99)
    assert errs[-1] < 1e-3


@pytest.mark.parametrize("mu", [0.3, 0.5, 0.7])
def test_left_composition_reproduces_vanishing_data(mu):
    f = lambda t: t**2 + 0.5 * t**3  # noqa: E731
    errs = []
    for n in (129, 257, 513, 1025):
        g = sampled(f, n)
        back = left_rl_integral(left_rl_derivative(g, mu), mu)
        errs.append(np.max(np.abs(back.values - g.values)[1:]))
    assert errs[0] > errs[1] > errs[2] > errs[3]


operators = [left_rl_integral, right_rl_integral, right_caputo_derivative, left_rl_derivative]


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(operators),
    st.floats(0.05, 0.95),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.integers(0, 2**32 - 1),
)
def test_linearity(op, mu, a, b, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(64)
    f1 = rng.normal(size=64)
    f2 = rng.normal(size=64)
    f1[0] = f2[0] = 0.0
    lhs = op(GridFunction(g, a * f1 + b * f2), mu).values
    rhs = a * op(GridFunction(g, f1), mu).values + b * op(GridFunction(g, f2), mu).values
    scale = 1 + np.max(np.abs(rhs)) + abs(a) * np.max(np.abs(op(GridFunction(g, f1), mu).values))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * scale * 64
