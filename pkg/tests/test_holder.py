import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mixsde import (ConfigError, GenConfig, GridPath, HolderParams, estimate_holder_exponent, gen_fbm,
                    norm_2alpha, norm_alpha, norm_infalpha, seminorm_0alpha)
from mixsde.holder import norm_alpha_profile, seminorm_profile
from conftest import PATH_TOL, QUAD_TOL, line


def test_params_window():
    p = HolderParams(0.35, 0.7)
    assert p.alpha == 0.35
    with pytest.raises(ConfigError):
        HolderParams(0.3, 0.7)  # alpha must exceed 1 - gamma strictly
    with pytest.raises(ConfigError):
        HolderParams(0.5, 0.9)
    with pytest.raises(ConfigError):
        HolderParams(0.4, 0.5)


def test_default_alpha_is_midpoint():
    p = HolderParams.default(0.7)
    assert p.alpha == pytest.approx(0.5 * (0.3 + 0.5))


def test_weights():
    p = HolderParams(0.3, 0.9)
    assert p.weight_g(1.0, 0.5) == pytest.approx(0.5**-0.3 + 0.5**-0.8)
    assert p.weight_h(1.0, 0.5) == pytest.approx(0.5**-1.3)


def test_norm_alpha_of_constant():
    assert norm_alpha(line(func=lambda t: 0 * t - 1.75), 0.3, 1.0) == 1.75


def test_norm_alpha_of_identity(grid_s):
    assert norm_alpha(grid_s, 0.3, 1.0) == pytest.approx(1 + 1 / 0.7, rel=QUAD_TOL)


def test_norm_alpha_refinement():
    f = gen_fbm(GenConfig(512, 1.0, 0.7, 3))
    assert norm_alpha(f.refine(4), 0.3, 1.0) == pytest.approx(norm_alpha(f, 0.3, 1.0), rel=PATH_TOL)


def test_seminorm_of_constant(grid_ones):
    assert seminorm_0alpha(grid_ones, 0.4, 1.0) == 0


def test_seminorm_of_identity(grid_s):
    assert seminorm_0alpha(grid_s, 0.4, 1.0) == pytest.approx(3.5, rel=QUAD_TOL)


def test_seminorm_at_intermediate_time(grid_s):
    # sup over pairs in [0, 1/2] of (v - u)**alpha (1 + 1/alpha)
    assert seminorm_0alpha(grid_s, 0.4, 0.5) == pytest.approx(0.5**0.4 * 3.5, rel=QUAD_TOL)


def test_norm_2alpha_examples(grid_ones):
    assert norm_2alpha(line(func=np.zeros_like), 0.3, 1.0) == 0
    assert norm_2alpha(grid_ones, 0.3, 1.0) == pytest.approx(1 / 0.7 + 1 / 0.2, rel=QUAD_TOL)


def test_norm_2alpha_refinement():
    f = gen_fbm(GenConfig(512, 1.0, 0.7, 8))
    assert norm_2alpha(f.refine(4), 0.3, 1.0) == pytest.approx(norm_2alpha(f, 0.3, 1.0), rel=2 * PATH_TOL)


def test_norm_infalpha_examples(grid_s, grid_ones):
    assert norm_infalpha(grid_ones.scaled(-2.0), 0.3, 1.0) == 2.0
    assert norm_infalpha(grid_s, 0.3, 1.0) == norm_alpha(grid_s, 0.3, 1.0)
    f = gen_fbm(GenConfig(256, 1.0, 0.7, 1))
    assert norm_infalpha(f, 0.3, 1.0) >= norm_alpha(f, 0.3, 1.0)


def test_profiles_match_pointwise_calls():
    f = gen_fbm(GenConfig(128, 1.0, 0.7, 2))
    prof = norm_alpha_profile(f, 0.3)
    semi = seminorm_profile(f, 0.3)
    for k in (1, 17, 64, 128):
        assert prof[k] == pytest.approx(norm_alpha(f, 0.3, f.times[k]), rel=1e-12)
        assert semi[k] == pytest.approx(seminorm_0alpha(f, 0.3, f.times[k]), rel=1e-12)
    assert np.all(np.diff(semi) >= 0)


def test_off_grid_time_rejected(grid_s):
    with pytest.raises(ConfigError):
        norm_alpha(grid_s, 0.3, 0.33333)
    with pytest.raises(ConfigError):
        norm_alpha(grid_s, 0.3, 0.0)
    with pytest.raises(ConfigError):
        norm_2alpha(grid_s, 0.6, 1.0)


def test_estimated_exponent():
    assert estimate_holder_exponent(gen_fbm(GenConfig(4096, 1.0, 0.7, 0))) == pytest.approx(0.7, abs=0.08)
    assert estimate_holder_exponent(line(1024)) == pytest.approx(1.0)
    assert estimate_holder_exponent(line(1024, func=np.ones_like)) == 1.0


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(0.05, 0.45), st.integers(0, 1000))
def test_seminorm_ignores_shift(c, alpha, seed):
    f = gen_fbm(GenConfig(64, 1.0, 0.7, seed))
    shifted = f.with_values(f.values + c)
    assert seminorm_0alpha(shifted, alpha, 1.0) == pytest.approx(seminorm_0alpha(f, alpha, 1.0), rel=1e-9, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.05, 0.9), st.integers(0, 1000))
def test_norms_are_homogeneous(lam, alpha, seed):
    f = gen_fbm(GenConfig(64, 1.0, 0.7, seed))
    assert norm_alpha(f.scaled(lam), alpha, 1.0) == pytest.approx(lam * norm_alpha(f, alpha, 1.0), rel=1e-9)
    assert seminorm_0alpha(f.scaled(lam), alpha, 1.0) == pytest.approx(lam * seminorm_0alpha(f, alpha, 1.0), rel=1e-9)
