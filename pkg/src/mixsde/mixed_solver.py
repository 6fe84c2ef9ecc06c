"""Euler schemes for the mixed equation

    dX = a(t, X) dt + b(t, X) dW + c(t, X) dZ,

its smooth-driver (random drift) form, and the stopping of the driver at
``tau_N``.

Coefficients are picked from a small catalog so that configurations stay
plain JSON, e.g. ``{"a": {"kind": "linear", "scale": 0.1}, "K": 1.0}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import ConfigError, GridPath, SolverOverflowError
from .holder import HolderParams, seminorm_profile

OVERFLOW_LIMIT = 1e12

Coef = Callable[[float, float], float]


# ---------------------------------------------------------------------------
# coefficient catalog: each entry returns (f, df/dx)
# ---------------------------------------------------------------------------

def _zero():
    return (lambda t, x: 0.0 * x), (lambda t, x: 0.0 * x)


def _constant(value=1.0):
    return (lambda t, x: value + 0.0 * x), (lambda t, x: 0.0 * x)


def _linear(scale=1.0, offset=0.0):
    return (lambda t, x: scale * x + offset), (lambda t, x: scale + 0.0 * x)


def _sine(amp=1.0, freq=1.0, phase=0.0):
    return (lambda t, x: amp * np.sin(freq * x + phase)), (lambda t, x: amp * freq * np.cos(freq * x + phase))


def _logistic(amp=1.0, rate=1.0):
    def f(t, x):
        return amp / (1.0 + np.exp(-rate * x))

    def df(t, x):
        s = 1.0 / (1.0 + np.exp(-rate * x))
        return amp * rate * s * (1.0 - s)

    return f, df


def _tanh(amp=1.0, rate=1.0):
    return (lambda t, x: amp * np.tanh(rate * x)), (lambda t, x: amp * rate / np.cosh(rate * x) ** 2)


CATALOG = {
    "zero": _zero,
    "constant": _constant,
    "linear": _linear,
    "sine": _sine,
    "logistic": _logistic,
    "tanh": _tanh,
}


def catalog_entry(spec: dict | None):
    spec = dict(spec or {"kind": "zero"})
    kind = spec.pop("kind", "zero")
    if kind not in CATALOG:
        raise ConfigError(f"unknown coefficient kind {kind!r}; choose from {sorted(CATALOG)}")
    try:
        return CATALOG[kind](**spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for coefficient kind {kind!r}: {exc}") from None


@dataclass
class CoefficientSet:
    """Coefficients ``a, b, c`` and ``dc/dx`` with the constants they are declared to satisfy."""

    a: Coef
    b: Coef
    c: Coef
    dc_dx: Coef
    K: float = 1.0
    K1: float | None = None
    beta: float = 1.0
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.K > 0:
            raise ConfigError(f"K must be positive, got {self.K}")
        if self.K1 is not None and not self.K1 > 0:
            raise ConfigError(f"K1 must be positive when given, got {self.K1}")
        if not self.beta > 0.5:
            raise ConfigError(f"beta must exceed 1/2, got {self.beta}")

    @classmethod
    def from_spec(cls, spec: dict) -> "CoefficientSet":
        a, _ = catalog_entry(spec.get("a"))
        b, _ = catalog_entry(spec.get("b"))
        c, dc = catalog_entry(spec.get("c"))
        return cls(a, b, c, dc, K=float(spec.get("K", 1.0)),
                   K1=None if spec.get("K1") is None else float(spec["K1"]),
                   beta=float(spec.get("beta", 1.0)), spec=dict(spec))

    @classmethod
    def linear(cls, mu: float, sigma: float, nu: float) -> "CoefficientSet":
        """``a = mu x``, ``b = sigma x``, ``c = nu x``: the mixed geometric model."""
        return cls.from_spec({
            "a": {"kind": "linear", "scale": mu},
            "b": {"kind": "linear", "scale": sigma},
            "c": {"kind": "linear", "scale": nu},
            "K": max(abs(mu) + abs(sigma) + abs(nu), 1e-12),
        })

    @property
    def is_null_c(self) -> bool:
        return (self.spec.get("c") or {"kind": "zero"}).get("kind", "zero") == "zero"


@dataclass(frozen=True)
class TruncationLevel:
    N: float

    def __post_init__(self):
        if not self.N > 0:
            raise ConfigError(f"truncation level must be positive, got {self.N}")


@dataclass(frozen=True)
class SolveConfig:
    x0: float
    n: int
    T: float = 1.0
    params: HolderParams | None = None
    seed_w: int = 0
    seed_z: int = 1

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError(f"n must be an integer >= 1, got {self.n!r}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not math.isfinite(self.x0):
            raise ConfigError("x0 must be finite")

    @property
    def dt(self) -> float:
        return self.T / self.n


# ---------------------------------------------------------------------------
# coefficient validation
# ---------------------------------------------------------------------------

@dataclass
class ConditionCheck:
    name: str
    max_ratio: float
    bound: float
    violations: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"name": self.name, "max_ratio": self.max_ratio, "bound": self.bound,
                "violations": self.violations, "passed": self.passed}


@dataclass
class CoefficientReport:
    checks: list[ConditionCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _ratio_check(name, num, den, bound, slack=1e-9) -> ConditionCheck:
    num = np.asarray(num, float)
    den = np.asarray(den, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    bad = int(np.sum(num > bound * den * (1 + slack) + slack))
    return ConditionCheck(name, float(np.max(r)) if r.size else 0.0, bound, bad)


def validate_coefficients(cs: CoefficientSet, t_samples, x_samples, quadruples: int = 100_000,
                          seed: int = 0) -> CoefficientReport:
    """Empirical check of the growth, Lipschitz and time-Hölder conditions and of the
    four-point inequality for ``c`` on sample grids.

    Ratios are reported against the declared constants; nothing is raised for
    a violation.
    """
    t = np.asarray(t_samples, float)
    x = np.asarray(x_samples, float)
    if t.size == 0 or x.size == 0:
        raise ConfigError("sample grids must be non-empty")
    K, beta = cs.K, cs.beta
    T, X = np.meshgrid(t, x, indexing="ij")
    av, bv, cv, dv = (np.broadcast_to(np.asarray(h(T, X), float), T.shape) for h in (cs.a, cs.b, cs.c, cs.dc_dx))
    checks = [
        _ratio_check("growth", np.abs(av) + np.abs(bv) + np.abs(cv), 1 + np.abs(X), K),
        _ratio_check("dc_dx_bound", np.abs(dv), np.ones_like(dv), K),
    ]
    # Lipschitz in x, pairs of neighbouring-and-distant sample points
    i, j = np.triu_indices(x.size, 1)
    lip_num = (np.abs(av[:, i] - av[:, j]) + np.abs(bv[:, i] - bv[:, j]) + np.abs(dv[:, i] - dv[:, j]))
    lip_den = np.broadcast_to(np.abs(x[i] - x[j]), lip_num.shape)
    checks.append(_ratio_check("lipschitz_x", lip_num, lip_den, K))
    # Hölder in time
    p, q = np.triu_indices(t.size, 1)
    th_num = (np.abs(av[p] - av[q]) + np.abs(bv[p] - bv[q]) + np.abs(cv[p] - cv[q]) + np.abs(dv[p] - dv[q]))
    th_den = np.broadcast_to((np.abs(t[p] - t[q]) ** beta)[:, None], th_num.shape)
    checks.append(_ratio_check("holder_t", th_num, th_den, K))
    if cs.K1 is not None:
        checks.append(_ratio_check("b_bounded", np.abs(bv), np.ones_like(bv), cs.K1))
    # four-point inequality on random quadruples drawn from the sample ranges
    rng = np.random.default_rng(seed)
    t1, t2 = rng.uniform(t.min(), t.max(), (2, quadruples))
    x1, x2, x3, x4 = rng.uniform(x.min(), x.max(), (4, quadruples))
    lhs = np.abs(cs.c(t1, x1) - cs.c(t2, x2) - cs.c(t1, x3) + cs.c(t2, x4))
    rhs = (np.abs(x1 - x2 - x3 + x4) + np.abs(x1 - x3) * np.abs(t2 - t1) ** beta
           + np.abs(x1 - x3) * (np.abs(x1 - x2) + np.abs(x3 - x4)))
    checks.append(_ratio_check("four_point", lhs, rhs, K))
    return CoefficientReport(checks)


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def _check_inputs(cfg: SolveConfig, *paths: GridPath):
    for p in paths:
        if p.n != cfg.n or abs(p.dt - cfg.dt) > 1e-12 * cfg.dt or p.t0 != 0.0:
            raise ConfigError(f"driver grid (n={p.n}, dt={p.dt}) does not match the solve grid (n={cfg.n}, dt={cfg.dt})")


def _guard(x: float, k: int, dt: float):
    if not (math.isfinite(x) and abs(x) <= OVERFLOW_LIMIT):
        raise SolverOverflowError(k, k * dt, x)


def euler_solve_mixed(cs: CoefficientSet, cfg: SolveConfig, W: GridPath, Z: GridPath) -> GridPath:
    """Left-point Euler: ``X_{k+1} = X_k + a dt + b dW_k + c dZ_k``."""
    _check_inputs(cfg, W, Z)
    dt = cfg.dt
    dW = np.diff(W.values).tolist()
    dZ = np.diff(Z.values).tolist()
    a, b, c = cs.a, cs.b, cs.c
    out = np.empty(cfg.n + 1)
    x = float(cfg.x0)
    out[0] = x
    for k in range(cfg.n):
        t = k * dt
        x = x + float(a(t, x)) * dt + float(b(t, x)) * dW[k] + float(c(t, x)) * dZ[k]
        _guard(x, k + 1, dt)
        out[k + 1] = x
    return GridPath(0.0, dt, out)


def solve_smooth_driver(cs: CoefficientSet, cfg: SolveConfig, W: GridPath, Zs: GridPath) -> GridPath:
    """Euler-Maruyama for ``dX = (a + c Zs') dt + b dW`` with ``Zs'`` the forward difference."""
    _check_inputs(cfg, W, Zs)
    dt = cfg.dt
    dW = np.diff(W.values).tolist()
    dZdt = (np.diff(Zs.values) / dt).tolist()
    a, b, c = cs.a, cs.b, cs.c
    out = np.empty(cfg.n + 1)
    x = float(cfg.x0)
    out[0] = x
    for k in range(cfg.n):
        t = k * dt
        x = x + (float(a(t, x)) + float(c(t, x)) * dZdt[k]) * dt + float(b(t, x)) * dW[k]
        _guard(x, k + 1, dt)
        out[k + 1] = x
    return GridPath(0.0, dt, out)


def geometric_solution(mu: float, sigma: float, nu: float, x0: float, W: GridPath, Z: GridPath) -> GridPath:
    """``x0 exp((mu - sigma^2/2) t + sigma W_t + nu Z_t)``, the exact linear mixed solution."""
    t = W.times
    return W.with_values(x0 * np.exp((mu - 0.5 * sigma**2) * t + sigma * W.values + nu * Z.values))


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def tau_N(Z: GridPath, p: HolderParams | float, level: TruncationLevel | float) -> float:
    """First grid time at which ``||Z||_{0,alpha;t} >= N``, else ``T``."""
    N = level.N if isinstance(level, TruncationLevel) else TruncationLevel(float(level)).N
    alpha = p.alpha if isinstance(p, HolderParams) else float(p)
    prof = seminorm_profile(Z, alpha)
    hit = np.flatnonzero(prof >= N)
    return float(Z.times[hit[0]]) if hit.size else Z.T


def stop_process(Z: GridPath, tau: float) -> GridPath:
    """``Z_{t ^ tau}`` (linear interpolation if ``tau`` falls between grid points)."""
    t = Z.times
    return Z.with_values(np.interp(np.minimum(t, tau), t, Z.values))
