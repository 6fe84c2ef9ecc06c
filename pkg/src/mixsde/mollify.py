"""One-sided moving average ``g^eps(t) = eps^-1 int_{max(0, t-eps)}^t g(s) ds``.

The path is extended by zero to negative times (it must start at 0), the
divisor is always ``eps``, and the window is integrated by the trapezoid
rule, which is exact for the piecewise linear interpolant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import ConfigError, GridPath
from .holder import HolderParams, seminorm_profile
from .process_gen import holder_constant

START_TOL = 1e-12


@dataclass(frozen=True)
class MollifyConfig:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")


def dyadic_widths(a0: float, n_max: int) -> list[float]:
    """``a_k = a0 * 2**-k`` for ``k = 0..n_max``."""
    return [a0 * 2.0 ** (-k) for k in range(n_max + 1)]


def snap_width(g: GridPath, eps: float) -> int:
    """Window length in cells; warns if ``eps`` is not a multiple of ``dt``."""
    cells = int(round(eps / g.dt))
    if cells < 1:
        raise ConfigError(f"epsilon={eps} is below one grid step dt={g.dt}")
    if cells >= g.n:
        raise ConfigError(f"epsilon={eps} must be smaller than the horizon {g.T - g.t0}")
    if abs(cells * g.dt - eps) > 1e-9 * eps:
        warnings.warn(f"epsilon={eps} snapped to {cells * g.dt} ({cells} grid steps)", stacklevel=3)
    return cells


def mollify(g: GridPath, cfg: MollifyConfig | float) -> GridPath:
    eps = cfg.epsilon if isinstance(cfg, MollifyConfig) else float(cfg)
    if not eps > 0:
        raise ConfigError(f"epsilon must be positive, got {eps}")
    if abs(g.values[0]) > START_TOL * max(1.0, float(np.max(np.abs(g.values)))):
        raise ConfigError(
            f"mollification needs g(0) = 0, got {g.values[0]!r}; shift the path by its initial value first"
        )
    L = snap_width(g, eps)
    width = L * g.dt
    v = g.values
    cum = np.concatenate(([0.0], np.cumsum(0.5 * g.dt * (v[1:] + v[:-1]))))
    lo = np.maximum(np.arange(g.n + 1) - L, 0)
    return g.with_values((cum - cum[lo]) / width)


@dataclass
class RateFit:
    slope: float
    intercept: float
    eps: list[float]
    errors: list[float] = field(default_factory=list)


def mollify_errors(g: GridPath, p: HolderParams | float, eps_list) -> list[float]:
    alpha = p.alpha if isinstance(p, HolderParams) else float(p)
    return [float(seminorm_profile(g - mollify(g, e), alpha)[-1]) for e in eps_list]


def fit_loglog(x, y) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(slope), float(intercept)


def mollify_rate(g: GridPath, p: HolderParams | float, eps_list) -> RateFit:
    """Least-squares slope of ``log ||g - g^eps||_{0,alpha;T}`` against ``log eps``."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ConfigError("the rate fit needs at least 4 widths")
    errors = mollify_errors(g, p, eps_list)
    if min(errors) <= 0:
        raise ConfigError("mollification error vanished (constant path?); the slope is undefined")
    slope, intercept = fit_loglog(eps_list, errors)
    return RateFit(slope, intercept, eps_list, errors)


def build_sequence(g: GridPath, a0: float, n_max: int) -> list[GridPath]:
    """Smooth approximations ``g_k = mollify(g, a0 * 2**-k)``, ``k = 0..n_max``."""
    if not 0 < a0 <= g.T - g.t0:
        raise ConfigError(f"a0 must lie in (0, T], got {a0}")
    return [mollify(g, a) for a in dyadic_widths(a0, n_max)]


def increment_gap_ratio(g: GridPath, eps: float, gamma: float, K: float | None = None) -> float:
    """max over grid pairs of ``|(g - g^eps)(t) - (g - g^eps)(s)| / (K (eps ^ |t-s|)**gamma)``.

    ``K`` defaults to the grid Hölder constant of ``g``; the moving-average
    estimate says this stays below a constant that does not depend on ``eps``.
    """
    K = holder_constant(g, gamma) if K is None else K
    d = (g - mollify(g, eps)).values
    best = 0.0
    for lag in range(1, g.n + 1):
        denom = K * min(eps, lag * g.dt) ** gamma
        best = max(best, float(np.max(np.abs(d[lag:] - d[:-lag]))) / denom)
    return best
