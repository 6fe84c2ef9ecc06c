import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as gamma_fn

from mixsde import (ConfigError, GenConfig, frac_deriv_left, frac_deriv_right, gen_fbm, gls_integral,
                    pathwise_bound, seminorm_0alpha, young_sum)
from conftest import PATH_TOL, QUAD_TOL, line


@pytest.mark.parametrize("alpha", [0.2, 0.3, 0.4])
def test_left_derivative_of_one(grid_ones, alpha):
    x = grid_ones.times[1:-1]
    got = frac_deriv_left(grid_ones, alpha, 0.0, 1.0).values[1:-1]
    assert np.max(np.abs(got / (x ** -alpha / gamma_fn(1 - alpha)) - 1)) < QUAD_TOL


@pytest.mark.parametrize("alpha", [0.2, 0.3, 0.4])
def test_left_derivative_of_identity(grid_s, alpha):
    x = grid_s.times[1:-1]
    got = frac_deriv_left(grid_s, alpha, 0.0, 1.0).values[1:-1]
    assert np.max(np.abs(got / (x ** (1 - alpha) / gamma_fn(2 - alpha)) - 1)) < QUAD_TOL


def test_left_derivative_on_subwindow():
    f = line(func=lambda t: t - 0.25)
    d = frac_deriv_left(f, 0.3, 0.25, 1.0)
    x = d.times[1:-1] - 0.25
    assert d.t0 == 0.25
    assert np.max(np.abs(d.values[1:-1] / (x**0.7 / gamma_fn(1.7)) - 1)) < QUAD_TOL


def test_left_derivative_refinement():
    f = gen_fbm(GenConfig(512, 1.0, 0.7, 6))
    coarse = frac_deriv_left(f, 0.3, 0.0, 1.0).values
    fine = frac_deriv_left(f.refine(4), 0.3, 0.0, 1.0).values[::4]
    # sup-relative comparison; pointwise ratios are meaningless near zeros of the derivative
    assert np.max(np.abs(fine - coarse)[1:-1]) <= PATH_TOL * np.max(np.abs(coarse))


def test_right_derivative_of_constant(grid_ones):
    assert np.all(frac_deriv_right(grid_ones.scaled(3.0), 0.4, 1.0).values == 0)


def test_right_derivative_of_identity(grid_s):
    # direct integration: -(1 - x)**0.4 (1 + 0.6/0.4) / Gamma(0.4)
    x = grid_s.times[1:-1]
    got = frac_deriv_right(grid_s, 0.4, 1.0).values[1:-1]
    assert np.max(np.abs(got / (-2.5 * (1 - x) ** 0.4 / gamma_fn(0.4)) - 1)) < QUAD_TOL


@pytest.mark.parametrize("seed", range(5))
def test_right_derivative_bounded_by_seminorm(seed):
    g = gen_fbm(GenConfig(512, 1.0, 0.7, seed))
    alpha = 0.35
    sup = np.max(np.abs(frac_deriv_right(g, alpha, 1.0).values))
    assert sup * gamma_fn(alpha) <= seminorm_0alpha(g, alpha, 1.0) * (1 + 1e-9)


def test_integral_of_one(grid_ones):
    g = line(func=lambda t: np.sin(3 * t) + t**2)
    expected = g.values[-1] - g.values[0]
    assert gls_integral(grid_ones, g, 0.3, 0.0, 1.0, gamma=1.0) == pytest.approx(expected, rel=QUAD_TOL)


def test_integral_of_s_against_s_squared(grid_s):
    g = line(func=lambda t: t * t)
    assert gls_integral(grid_s, g, 0.3, 0.0, 1.0, gamma=1.0) == pytest.approx(2 / 3, rel=QUAD_TOL)


def test_integral_on_subinterval(grid_s):
    g = line(func=lambda t: t * t)
    # int_a^b 2 s^2 ds
    assert gls_integral(grid_s, g, 0.3, 0.25, 0.75, gamma=1.0) == pytest.approx(
        2 / 3 * (0.75**3 - 0.25**3), rel=QUAD_TOL)
    assert gls_integral(grid_s, g, 0.3, 0.5, 0.5) == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_matches_young_sum(seed):
    g = gen_fbm(GenConfig(2048, 1.0, 0.7, seed))
    f = line(func=np.sin)
    young = young_sum(f, g)
    assert gls_integral(f, g, 0.35, 0.0, 1.0, gamma=0.69) == pytest.approx(young, rel=PATH_TOL)


def test_admissibility():
    g = gen_fbm(GenConfig(256, 1.0, 0.7, 0))
    f = line(256, func=np.sin)
    with pytest.raises(ConfigError):
        gls_integral(f, g, 0.3, 0.0, 1.0, gamma=0.7)
    with pytest.raises(ConfigError):
        gls_integral(f, g, 0.5, 0.0, 1.0, gamma=0.9)
    with pytest.warns(UserWarning):
        gls_integral(f, g, 0.1, 0.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gls_integral(f, g, 0.4, 0.0, 1.0)


def test_grids_must_match():
    with pytest.raises(ConfigError):
        gls_integral(line(64), line(128), 0.3, 0.0, 1.0, gamma=1.0)


def test_bound_examples(grid_s, grid_ones):
    assert pathwise_bound(line(func=np.zeros_like), grid_s, 0.3, 0.0, 1.0, gamma=1.0) == (0.0, 0.0)
    integral, bound = pathwise_bound(grid_ones, grid_s, 0.3, 0.0, 1.0, gamma=1.0)
    assert integral == pytest.approx(1.0, rel=QUAD_TOL)
    assert bound >= integral


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_integral_is_linear_in_integrand(seed, c1, c2):
    g = gen_fbm(GenConfig(128, 1.0, 0.7, seed))
    f1, f2 = line(128, func=np.cos), line(128, func=lambda t: t**2)
    combo = f1.with_values(c1 * f1.values + c2 * f2.values)
    lhs = gls_integral(combo, g, 0.35, 0.0, 1.0, gamma=0.69)
    rhs = c1 * gls_integral(f1, g, 0.35, 0.0, 1.0, gamma=0.69) + c2 * gls_integral(f2, g, 0.35, 0.0, 1.0, gamma=0.69)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
