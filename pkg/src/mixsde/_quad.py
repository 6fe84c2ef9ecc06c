"""Product-integration weights for power-law kernels on a uniform grid.

Every singular integral in the package has the form

    int_0^{L*dt} phi(y) * y**(-p) dy

with ``phi`` known at the nodes ``y = m*dt`` and taken piecewise linear in
between. On cell ``m`` the kernel is integrated exactly against the two hat
functions, which gives

    dt**(1-p) * sum_m (A[m]*phi[m] + B[m]*phi[m+1])

with ``A[m] = int_0^1 (1-s)(m+s)**(-p) ds`` and ``B[m] = int_0^1 s(m+s)**(-p) ds``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GL_S = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


@lru_cache(maxsize=64)
def _weights(p: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    if not p < 2:
        raise ValueError(f"kernel exponent must be < 2, got {p}")
    A = np.empty(count)
    B = np.empty(count)
    # cell 0: closed form; for p >= 1 the left weight diverges and phi[0] must vanish
    B[0] = 1.0 / (2.0 - p)
    A[0] = 1.0 / (1.0 - p) - 1.0 / (2.0 - p) if p < 1 else 0.0
    if count > 1:
        # cells m >= 1: the integrand is analytic on [0, 1] with its singularity at
        # s = -m, so 12-point Gauss-Legendre is exact to rounding and avoids the
        # cancellation of the closed form at large m
        m = np.arange(1, count, dtype=float)[:, None]
        k = (m + _GL_S) ** (-p)
        A[1:] = k @ (_GL_W * (1.0 - _GL_S))
        B[1:] = k @ (_GL_W * _GL_S)
    A.setflags(write=False)
    B.setflags(write=False)
    return A, B


def cell_weights(p: float, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Dimensionless weights ``(A, B)`` for cells ``0..count-1`` of kernel ``y**(-p)``."""
    return _weights(float(p), int(max(count, 1)))


def running_sums(f: np.ndarray, p: float) -> np.ndarray:
    """Signed product integrals at every node, looking backwards.

    Returns ``S[k] = sum_{m<k} A[m]*phi_k[m] + B[m]*phi_k[m+1]`` with
    ``phi_k[m] = f[k] - f[k-m]`` (so ``phi_k[0] = 0``). Because the weights only
    depend on the offset ``m`` this is a Toeplitz sum, evaluated as a direct
    convolution in ``O(n^2)`` without any FFT rounding.
    """
    f = np.asarray(f, dtype=float)
    n = f.size - 1
    A, B = cell_weights(p, n + 1)
    # full weight of offset m when the cell on both sides of it is inside the window
    W = np.zeros(n + 1)
    W[1:] = B[:n] + A[1:]
    S = f * np.cumsum(W) - np.convolve(f, W)[: n + 1]
    # the last offset m = k only has its right-hand cell
    k = np.arange(1, n + 1)
    S[1:] -= A[k] * (f[1:] - f[0])
    S[0] = 0.0
    return S


def integrate_power_kernel(psi: np.ndarray, p: float, dt: float) -> float:
    """``int_0^{n*dt} psi(y) y**(-p) dy`` for piecewise linear ``psi`` (needs ``p < 1``)."""
    psi = np.asarray(psi, dtype=float)
    n = psi.size - 1
    A, B = cell_weights(p, n)
    return dt ** (1.0 - p) * float(np.dot(A[:n], psi[:-1]) + np.dot(B[:n], psi[1:]))
