"""The alpha-norm family for sampled paths.

All singular integrals use product integration (see ``_quad``): the factor
``|f(t) - f(s)|`` is interpolated linearly between nodes and the power kernel
is integrated exactly on each cell. Suprema run over grid points only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._quad import cell_weights, integrate_power_kernel
from .grid import ConfigError, GridPath


@dataclass(frozen=True)
class HolderParams:
    """Exponent pair with ``1 - gamma < alpha < 1/2``.

    ``gamma`` is the Hölder exponent of the driver. The weights used by the
    norms are ``g(t, s) = s**-alpha + (t - s)**(-alpha - 1/2)`` and
    ``h(t, s) = (t - s)**(-1 - alpha)``.
    """

    alpha: float
    gamma: float

    def __post_init__(self):
        if not 0.5 < self.gamma <= 1:
            raise ConfigError(f"gamma must lie in (1/2, 1], got {self.gamma}")
        if not 1 - self.gamma < self.alpha < 0.5:
            raise ConfigError(
                f"alpha must lie in (1 - gamma, 1/2) = ({1 - self.gamma:.6g}, 0.5), got {self.alpha}"
            )

    @classmethod
    def default(cls, gamma: float) -> "HolderParams":
        """Midpoint of the admissible interval, ``alpha = (3 - 2*gamma) / 4``."""
        return cls((3.0 - 2.0 * gamma) / 4.0, gamma)

    def weight_g(self, t, s):
        return s ** (-self.alpha) + (t - s) ** (-self.alpha - 0.5)

    def weight_h(self, t, s):
        return (t - s) ** (-1.0 - self.alpha)


def estimate_holder_exponent(f: GridPath) -> float:
    """Exponent from the scaling of mean squared increments over dyadic lags, clipped to [0, 1]."""
    lags = [1 << j for j in range(max(1, int(np.log2(f.n)) - 2))]
    msq = np.array([np.mean(np.diff(f.values[::lag]) ** 2) for lag in lags])
    if len(lags) < 2 or np.any(msq <= 0):
        return 1.0
    slope = np.polyfit(np.log(lags), np.log(msq), 1)[0]
    return float(np.clip(slope / 2.0, 0.0, 1.0))


def _alpha_of(p) -> float:
    alpha = p.alpha if isinstance(p, HolderParams) else float(p)
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _end_index(f: GridPath, t: float) -> int:
    k = f.index_of(t)
    if k == 0:
        raise ConfigError("t must be a grid point strictly after the start of the path")
    return k


def norm_alpha_profile(f: GridPath, alpha: float) -> np.ndarray:
    """``||f||_{alpha;s}`` at every grid point ``s`` (``|f(t0)|`` at the start)."""
    v = f.values
    n = f.n
    A, B = cell_weights(1.0 + alpha, n)
    scale = f.dt ** (-alpha)
    out = np.abs(v).astype(float)
    for k in range(1, n + 1):
        # d[m] = |f(t_k) - f(t_k - m dt)|
        d = np.abs(v[k] - v[k::-1])
        out[k] += scale * (np.dot(A[:k], d[:k]) + np.dot(B[:k], d[1:]))
    return out


def norm_alpha(f: GridPath, p, t: float) -> float:
    """``|f(t)| + int_0^t |f(t) - f(s)| (t - s)**(-1-alpha) ds``."""
    alpha = _alpha_of(p)
    k = _end_index(f, t)
    return float(norm_alpha_profile(f.window(f.t0, f.t0 + k * f.dt), alpha)[-1])


def norm_infalpha(f: GridPath, p, t: float) -> float:
    """``sup_{s <= t} ||f||_{alpha;s}`` over grid points."""
    alpha = _alpha_of(p)
    k = _end_index(f, t)
    return float(np.max(norm_alpha_profile(f.window(f.t0, f.t0 + k * f.dt), alpha)))


def weighted_alpha_integral(prof: np.ndarray, alpha: float, dt: float, power_left: float,
                            power_right: float) -> float:
    """``int_0^t prof(s) (s**-power_left + (t-s)**-power_right) ds``, prof piecewise linear."""
    return integrate_power_kernel(prof, power_left, dt) + integrate_power_kernel(prof[::-1], power_right, dt)


def norm_2alpha(f: GridPath, p, t: float) -> float:
    """Squared norm ``||f||^2_{2,alpha;t} = int_0^t ||f||^2_{alpha;s} g(t, s) ds``.

    Returned squared, as written; ``sqrt`` of the result is the homogeneous norm.
    """
    alpha = _alpha_of(p)
    if not alpha < 0.5:
        raise ConfigError("the 2,alpha norm needs alpha < 1/2")
    k = _end_index(f, t)
    prof = norm_alpha_profile(f.window(f.t0, f.t0 + k * f.dt), alpha)
    return weighted_alpha_integral(prof**2, alpha, f.dt, alpha, alpha + 0.5)


def seminorm_profile(f: GridPath, alpha: float) -> np.ndarray:
    """``||f||_{0,alpha;t}`` at every grid point ``t`` (zero at the start).

    For each left point ``u`` the inner integral over ``z in (u, v)`` is a
    running sum in ``v``, so all grid pairs cost ``O(n^2)`` in total. The
    supremum is a max-reduction, independent of evaluation order.
    """
    v = f.values
    n = f.n
    A, B = cell_weights(2.0 - alpha, n)
    scale = f.dt ** (alpha - 1.0)
    lag_pow = (f.dt * np.arange(1, n + 1)) ** (1.0 - alpha)
    colmax = np.zeros(n + 1)
    for i in range(n):
        d = np.abs(v[i:] - v[i])
        L = d.size - 1
        cells = A[:L] * d[:-1] + B[:L] * d[1:]
        vals = d[1:] / lag_pow[:L] + scale * np.cumsum(cells)
        np.maximum(colmax[i + 1 :], vals, out=colmax[i + 1 :])
    return np.maximum.accumulate(colmax)


def seminorm_0alpha(f: GridPath, p, t: float) -> float:
    """sup over grid pairs ``u < v <= t`` of the increment quotient plus the ``(z-u)**(alpha-2)`` integral."""
    alpha = _alpha_of(p)
    k = _end_index(f, t)
    return float(seminorm_profile(f.window(f.t0, f.t0 + k * f.dt), alpha)[-1])
