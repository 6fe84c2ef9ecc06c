"""Seeded Wiener and fractional Brownian motion paths on uniform grids.

Gaussian draws come from numpy's PCG64 bit generator through
``Generator.standard_normal`` (ziggurat), both of which are reproducible
bit-for-bit across platforms. Wiener paths and fBm paths consume the same
``n`` standard normals from a given seed, so at ``H = 1/2`` the Cholesky
factor of ``min(s, t)`` reproduces the Wiener path up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lapack

from .grid import ConfigError, FactorizationError, GridPath

FBM_MAX_N = 4096
_SEED_MASK = (1 << 64) - 1
_SEED_STRIDE = 0x9E3779B97F4A7C15  # odd, 2^64 / golden ratio


@dataclass(frozen=True)
class GenConfig:
    n: int
    T: float = 1.0
    H: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError(f"n must be an integer >= 1, got {self.n!r}")
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if not 0 < self.H < 1:
            raise ConfigError(f"H must lie in (0, 1), got {self.H}")
        if not 0 <= int(self.seed) <= _SEED_MASK:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def dt(self) -> float:
        return self.T / self.n


def split_seed(master: int, index: int) -> int:
    """Counter-based child seed: ``master XOR index * 0x9E3779B97F4A7C15 (mod 2^64)``."""
    return (int(master) ^ (int(index) * _SEED_STRIDE)) & _SEED_MASK


def path_seeds(master: int, index: int) -> tuple[int, int]:
    """Seeds of the Wiener and the Hölder driver for ensemble member ``index``."""
    return split_seed(master, 2 * index), split_seed(master, 2 * index + 1)


def _normals(seed: int, n: int) -> np.ndarray:
    return np.random.default_rng(int(seed)).standard_normal(n)


def gen_wiener(cfg: GenConfig) -> GridPath:
    z = _normals(cfg.seed, cfg.n)
    values = np.concatenate(([0.0], np.cumsum(np.sqrt(cfg.dt) * z)))
    return GridPath(0.0, cfg.dt, values)


def fbm_covariance(times: np.ndarray, H: float) -> np.ndarray:
    s, t = times[:, None], times[None, :]
    return 0.5 * (s ** (2 * H) + t ** (2 * H) - np.abs(t - s) ** (2 * H))


@lru_cache(maxsize=2)
def _unit_cholesky(n: int, H: float) -> np.ndarray:
    # grid k/n on [0, 1]; other horizons follow by self-similarity
    cov = fbm_covariance(np.arange(1, n + 1) / n, H)
    L, info = lapack.dpotrf(cov, lower=1, clean=1)
    if info > 0:
        raise FactorizationError(int(info), f"fBm covariance (n={n}, H={H}) is not positive definite at pivot {info}")
    if info < 0:
        raise FactorizationError(0, f"dpotrf rejected argument {-info}")
    L.setflags(write=False)
    return L


def gen_fbm(cfg: GenConfig) -> GridPath:
    """Exact fBm on the grid via Cholesky of the grid covariance.

    The factor is computed for the unit horizon and cached, so a path for
    horizon ``T`` is exactly ``T**H`` times the unit path with the same seed.
    """
    if cfg.n > FBM_MAX_N:
        raise ConfigError(f"fBm grid size {cfg.n} exceeds the Cholesky cap {FBM_MAX_N}")
    if not 0.5 <= cfg.H < 1:
        raise ConfigError(f"fBm generation needs 1/2 <= H < 1, got {cfg.H}")
    L = _unit_cholesky(cfg.n, float(cfg.H))
    unit = L @ _normals(cfg.seed, cfg.n)
    values = np.concatenate(([0.0], cfg.T ** cfg.H * unit))
    return GridPath(0.0, cfg.dt, values)


def holder_constant(path: GridPath, gamma: float) -> float:
    """max over grid pairs u < v of ``|f(v) - f(u)| / (v - u)**gamma``."""
    if not 0 < gamma <= 1:
        raise ConfigError(f"gamma must lie in (0, 1], got {gamma}")
    f = path.values
    best = 0.0
    for lag in range(1, path.n + 1):
        inc = np.max(np.abs(f[lag:] - f[:-lag]))
        best = max(best, inc / (lag * path.dt) ** gamma)
    return float(best)
