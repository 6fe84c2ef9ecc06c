"""Sampled paths on uniform time grids, plus their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """A configuration value violates an operation's precondition."""


class FactorizationError(RuntimeError):
    """Cholesky factorization of a covariance matrix broke down."""

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"covariance matrix is not positive definite at pivot {pivot}")


class SolverOverflowError(RuntimeError):
    """The state of a solver left the finite range."""

    def __init__(self, step: int, t: float, value: float):
        self.step = step
        self.t = t
        self.value = value
        super().__init__(f"non-finite or overflowing state {value!r} at step {step} (t={t:.6g})")


@dataclass(frozen=True)
class GridPath:
    """Real function sampled at ``t0 + k*dt`` for ``k = 0..n``."""

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ConfigError("a grid path needs at least two samples (n >= 1)")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(values)):
            raise ConfigError("grid path values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func, n: int, T: float, t0: float = 0.0) -> "GridPath":
        dt = (T - t0) / n
        t = t0 + dt * np.arange(n + 1)
        return cls(t0, dt, np.asarray(func(t), dtype=float) * np.ones(n + 1))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def T(self) -> float:
        return self.t0 + self.n * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n + 1)

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; no interpolation is ever done."""
        k = (t - self.t0) / self.dt
        kr = int(round(k))
        if abs(k - kr) > 1e-9 * max(1.0, abs(k)) or not 0 <= kr <= self.n:
            raise ConfigError(f"t={t} is not a grid point of [{self.t0}, {self.T}] with dt={self.dt}")
        return kr

    def window(self, a: float, b: float) -> "GridPath":
        i, j = self.index_of(a), self.index_of(b)
        if j <= i:
            raise ConfigError(f"need a < b, got a={a}, b={b}")
        return GridPath(self.t0 + i * self.dt, self.dt, self.values[i : j + 1])

    def with_values(self, values) -> "GridPath":
        return GridPath(self.t0, self.dt, values)

    def same_grid(self, other: "GridPath") -> bool:
        return self.n == other.n and self.t0 == other.t0 and self.dt == other.dt

    def __add__(self, other: "GridPath") -> "GridPath":
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridPath") -> "GridPath":
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def scaled(self, factor: float) -> "GridPath":
        return self.with_values(factor * self.values)

    def refine(self, factor: int) -> "GridPath":
        """Linear interpolation onto a grid ``factor`` times finer."""
        dt = self.dt / factor
        t = self.t0 + dt * np.arange(self.n * factor + 1)
        return GridPath(self.t0, dt, np.interp(t, self.times, self.values))


def _check_same_grid(f: GridPath, g: GridPath):
    if not f.same_grid(g):
        raise ConfigError("paths live on different grids")


def write_csv(path: GridPath, dest, header=("t", "value")):
    """Write ``t,value`` rows with 17 significant digits (lossless round trip)."""
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, v in zip(path.times, path.values):
            w.writerow((format(t, ".17g"), format(v, ".17g")))


def read_csv(src) -> GridPath:
    with open(src, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise ConfigError(f"{src}: need a header and at least two rows")
    data = np.array([[float(x) for x in r[:2]] for r in rows[1:] if r])
    t, v = data[:, 0], data[:, 1]
    dt = t[1] - t[0]
    if dt <= 0 or not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0):
        raise ConfigError(f"{src}: time column is not a uniform increasing grid")
    return GridPath(float(t[0]), float(dt), v)
