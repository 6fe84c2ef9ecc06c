import numpy as np
import pytest

from mixsde import ConfigError, GenConfig, HolderParams, MollifyConfig, build_sequence, gen_fbm, mollify, mollify_rate
from mixsde.mollify import dyadic_widths, increment_gap_ratio, mollify_errors
from conftest import line


def test_zero_path():
    assert np.all(mollify(line(func=np.zeros_like), 0.125).values == 0)


def test_linear_path_exact(grid_s):
    m = mollify(grid_s, MollifyConfig(0.125))
    t = grid_s.times
    tail = t >= 0.125
    assert np.max(np.abs(m.values[tail] - (t[tail] - 0.0625))) < 1e-12
    # before eps the window is padded with zeros: t^2 / (2 eps)
    assert np.allclose(m.values[~tail], t[~tail] ** 2 / 0.25, atol=1e-12)


def test_preconditions(grid_s, grid_ones):
    with pytest.raises(ConfigError):
        mollify(grid_ones, 0.1)
    with pytest.raises(ConfigError):
        mollify(grid_s, 0.0)
    with pytest.raises(ConfigError):
        mollify(grid_s, 1e-6)
    with pytest.raises(ConfigError):
        mollify(grid_s, 1.0)
    with pytest.warns(UserWarning, match="snapped"):
        mollify(grid_s, 0.1)


@pytest.mark.parametrize("seed", range(5))
def test_error_shrinks_from_coarse_widths(seed):
    # per seed, 2^-6 against widths at least 8x larger; adjacent widths are within noise
    g = gen_fbm(GenConfig(2048, 1.0, 0.7, seed))
    e = mollify_errors(g, 0.35, [2.0**-6, 2.0**-3, 2.0**-2])
    assert 0 < e[0] < min(e[1:])


def test_rate_on_linear_path(grid_s):
    fit = mollify_rate(grid_s, 0.35, [2.0**-k for k in range(4, 10)])
    assert fit.slope >= 0.35 - 0.1


def test_rate_rejects_constant_and_short_lists(grid_s):
    with pytest.raises(ConfigError):
        mollify_rate(line(func=np.zeros_like), 0.35, [2.0**-k for k in range(4, 8)])
    with pytest.raises(ConfigError):
        mollify_rate(grid_s, 0.35, [0.25, 0.125, 0.0625])


def test_rate_on_fbm_single_seed():
    g = gen_fbm(GenConfig(2048, 1.0, 0.7, 1))
    fit = mollify_rate(g, HolderParams(0.35, 0.69), [2.0**-k for k in range(4, 10)])
    assert len(fit.errors) == 6
    assert -0.5 < fit.slope < 1.0


def test_sequence(grid_s):
    assert dyadic_widths(0.5, 3) == [0.5, 0.25, 0.125, 0.0625]
    seq = build_sequence(grid_s, 0.25, 0)
    assert len(seq) == 1 and np.array_equal(seq[0].values, mollify(grid_s, 0.25).values)
    seq = build_sequence(grid_s, 0.25, 3)
    for k, gk in enumerate(seq):
        a = 0.25 * 2.0**-k
        tail = grid_s.times >= a
        assert np.max(np.abs(gk.values[tail] - (grid_s.times[tail] - a / 2))) < 1e-12


def test_sequence_errors_decrease_overall():
    g = gen_fbm(GenConfig(2048, 1.0, 0.7, 2))
    seq = build_sequence(g, 0.25, 5)
    errs = mollify_errors(g, 0.35, [0.25 * 2.0**-k for k in range(6)])
    assert len(seq) == 6
    assert errs[-1] < errs[0]


def test_increment_gap_ratio_bounded_across_widths():
    g = gen_fbm(GenConfig(1024, 1.0, 0.7, 0))
    ratios = [increment_gap_ratio(g, 2.0**-k, 0.65) for k in range(2, 7)]
    assert max(ratios) <= 2.0
    assert max(ratios) / min(ratios) < 3.0
