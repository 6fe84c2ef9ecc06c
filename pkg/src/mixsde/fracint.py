"""Fractional derivatives and the generalized Lebesgue-Stieltjes integral.

Everything is real-valued. With ``Df = D^alpha_{a+} f`` (left Riemann-Liouville
derivative in Marchaud form) and ``Rg`` the real Marchaud expression

    Rg(x) = (g(x) - g(b)) / (b - x)**(1-alpha)
            + (1 - alpha) * int_x^b (g(x) - g(u)) / (u - x)**(2-alpha) du,

divided by ``Gamma(alpha)``, the integral is

    int_a^b f dg = -int_a^b Df(x) * Rg(x) dx.

The minus sign is the product of the complex unit factors of the two
derivatives, ``(-1)**alpha * (-1)**(1-alpha) = -1``; with it ``int 1 dg``
equals ``g(b) - g(a)``.

Nodal values are exact for the piecewise linear interpolants of ``f`` and
``g``. The outer ``dx`` integral treats ``(x - a)**alpha * Df * Rg`` as
piecewise linear and integrates it against ``(x - a)**-alpha`` exactly, which
handles the singular first cell; ``Rg(b) = 0`` closes the last one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

from ._quad import integrate_power_kernel, running_sums
from .grid import ConfigError, GridPath
from .holder import estimate_holder_exponent


def _check_order(alpha: float):
    if not 0 < alpha < 1:
        raise ConfigError(f"fractional order alpha must lie in (0, 1), got {alpha}")


def _left_nodes(v: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    """``D^alpha_{a+} f`` at nodes ``1..n`` of the window (index 0 left as nan)."""
    S = running_sums(v - v[0], 1.0 + alpha)  # differences only; shift keeps constants exact
    x = dt * np.arange(v.size)
    out = np.full(v.size, np.nan)
    out[1:] = (v[1:] / x[1:] ** alpha + alpha * dt ** (-alpha) * S[1:]) / gamma_fn(1.0 - alpha)
    return out


def _right_nodes(v: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    """Real ``D^{1-alpha}_{b-} g_{b-}`` at nodes ``0..n-1``; the limit 0 at ``b``."""
    S = running_sums(v[::-1] - v[-1], 2.0 - alpha)[::-1]
    y = dt * np.arange(v.size)[::-1]
    out = np.zeros(v.size)
    out[:-1] = ((v[:-1] - v[-1]) / y[:-1] ** (1.0 - alpha) + (1.0 - alpha) * dt ** (alpha - 1.0) * S[:-1]) / gamma_fn(alpha)
    return out


def frac_deriv_left(f: GridPath, alpha: float, a: float, b: float) -> GridPath:
    """``D^alpha_{a+} f`` on the grid of ``[a, b]``; zero at both endpoints (indicator of ``(a, b)``)."""
    _check_order(alpha)
    w = f.window(a, b)
    out = _left_nodes(w.values, alpha, w.dt)
    out[0] = out[-1] = 0.0
    return w.with_values(out)


def frac_deriv_right(g: GridPath, alpha: float, b: float, a: float | None = None) -> GridPath:
    """Real-valued ``D^{1-alpha}_{b-} g_{b-}`` on the grid of ``[a, b]``, zero at both endpoints."""
    _check_order(alpha)
    w = g.window(g.t0 if a is None else a, b)
    out = _right_nodes(w.values, alpha, w.dt)
    out[0] = out[-1] = 0.0
    return w.with_values(out)


def _check_admissible(g: GridPath, alpha: float, gamma: float | None):
    if not 0 < alpha < 0.5:
        raise ConfigError(f"alpha must lie in (0, 1/2), got {alpha}")
    if gamma is not None:
        if not 1 - gamma < alpha:
            raise ConfigError(f"alpha={alpha} is not above 1 - gamma = {1 - gamma:.6g}")
        return
    est = estimate_holder_exponent(g)
    if not 1 - est < alpha:
        warnings.warn(
            f"alpha={alpha} is at or below 1 - (estimated Hölder exponent {est:.3f}) of the integrator",
            stacklevel=3,
        )


@dataclass(frozen=True)
class _Pieces:
    psi_f: np.ndarray  # (x-a)**alpha * D^alpha f, with its limit f(a)/Gamma(1-alpha) at a
    rg: np.ndarray
    dt: float


def _pieces(f: GridPath, g: GridPath, alpha: float, a: float, b: float) -> _Pieces:
    if not f.same_grid(g):
        raise ConfigError("integrand and integrator must share a grid")
    fw, gw = f.window(a, b), g.window(a, b)
    dt = fw.dt
    u = _left_nodes(fw.values, alpha, dt)
    x = dt * np.arange(fw.n + 1)
    psi_f = np.empty(fw.n + 1)
    psi_f[1:] = x[1:] ** alpha * u[1:]
    psi_f[0] = fw.values[0] / gamma_fn(1.0 - alpha)
    return _Pieces(psi_f, _right_nodes(gw.values, alpha, dt), dt)


def gls_integral(f: GridPath, g: GridPath, alpha: float, a: float, b: float,
                 gamma: float | None = None) -> float:
    """Pathwise ``int_a^b f dg`` through fractional derivatives of order ``alpha``.

    ``gamma`` is the Hölder exponent of ``g``; if omitted it is estimated and
    an inadmissible ``alpha`` only triggers a warning.
    """
    if a == b:
        return 0.0
    _check_admissible(g, alpha, gamma)
    p = _pieces(f, g, alpha, a, b)
    return -integrate_power_kernel(p.psi_f * p.rg, alpha, p.dt)


def pathwise_bound(f: GridPath, g: GridPath, alpha: float, a: float, b: float,
                   gamma: float | None = None) -> tuple[float, float]:
    """``(integral, bound)`` with ``bound = int |D^alpha f| dx * sup |D^{1-alpha} g_{b-}|``.

    The bound uses the same nonnegative quadrature weights as the integral,
    so ``|integral| <= bound`` holds exactly on the grid.
    """
    if a == b:
        return 0.0, 0.0
    _check_admissible(g, alpha, gamma)
    p = _pieces(f, g, alpha, a, b)
    integral = -integrate_power_kernel(p.psi_f * p.rg, alpha, p.dt)
    bound = integrate_power_kernel(np.abs(p.psi_f), alpha, p.dt) * float(np.max(np.abs(p.rg)))
    return integral, bound


def young_sum(f: GridPath, g: GridPath, a: float | None = None, b: float | None = None) -> float:
    """Forward Riemann-Stieltjes sum ``sum f(t_k) (g(t_{k+1}) - g(t_k))``."""
    a = f.t0 if a is None else a
    b = f.T if b is None else b
    fv, gv = f.window(a, b).values, g.window(a, b).values
    return float(np.dot(fv[:-1], np.diff(gv)))
