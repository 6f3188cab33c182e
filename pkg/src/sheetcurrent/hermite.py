"""Hermite polynomials in the 1/n! convention, Gaussian kernels and bounds.

Throughout, ``H_n`` denotes the probabilists' Hermite polynomial divided
by ``n!``::

    H_0 = 1,  H_1(x) = x,  (n + 1) H_{n+1}(x) = x H_n(x) - H_{n-1}(x)

High-degree work never forms ``H_n`` itself. It uses the orthonormal
polynomials ``q_n = sqrt(n!) H_n`` and the weighted functions
``G_n(y) = q_n(y) exp(-y^2 / 2)``, which stay bounded by
``sqrt(n! c_n^2)`` and are generated with power-of-two rescaling so that
neither the polynomial nor the Gaussian factor overflows or underflows
on its own.
"""

from __future__ import annotations

import math
from typing import Iterator, NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DomainError, ToleranceError

__all__ = [
    "STIRLING_LIMIT",
    "hermite",
    "hermite_table",
    "orthonormal_hermite",
    "weighted_hermite",
    "gaussian_kernel",
    "gaussian_kernel_d",
    "log_bound_constant",
    "bound_constant",
    "scaled_bound",
    "stirling_ratio",
    "IdentityResidual",
    "hermite_gaussian_identity_residual",
    "bound_margin",
]

# lim n! c_n^2 sqrt(n); the sequence increases towards it
STIRLING_LIMIT = 4.0 * math.sqrt(2.0) / math.pi**1.5

_LN2 = math.log(2.0)
_RESCALE_BITS = 500
_RESCALE_AT = 2.0**_RESCALE_BITS


def hermite(n: int, x):
    """``H_n(x)`` by the normalized three-term recurrence."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev[()]
    h = x.copy()
    for k in range(1, n):
        h_prev, h = h, (x * h - h_prev) / (k + 1)
    return h[()]


def hermite_table(n_max: int, x) -> np.ndarray:
    """``H_0 .. H_{n_max}`` stacked along a new leading axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = (x * out[k] - out[k - 1]) / (k + 1)
    return out


def _sqrt_table(n: int) -> np.ndarray:
    return np.sqrt(np.arange(n + 2, dtype=float))


def orthonormal_hermite(y, m_max: int) -> Iterator[np.ndarray]:
    """Yield ``q_m(y) = sqrt(m!) H_m(y)`` for m = 0 .. m_max.

    No rescaling: meant for arguments of moderate size (normalized sheet
    values), where ``q_m`` is well inside the double range.
    """
    y = np.asarray(y, dtype=float)
    root = _sqrt_table(m_max)
    q_prev = np.ones_like(y)
    yield q_prev
    if m_max == 0:
        return
    q = y.copy()
    yield q
    for m in range(1, m_max):
        q_prev, q = q, (y * q - root[m] * q_prev) / root[m + 1]
        yield q


def weighted_hermite(y, m_max: int) -> Iterator[np.ndarray]:
    """Yield ``G_m(y) = sqrt(m!) H_m(y) exp(-y^2/2)`` for m = 0 .. m_max.

    Valid for any finite ``y``; values that are below the double range
    come out as 0.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    root = _sqrt_table(m_max)
    half_sq = 0.5 * y * y
    exp2 = np.zeros_like(y)
    factor = np.exp(-half_sq)
    q_prev = np.ones_like(y)
    yield factor.reshape(shape)
    if m_max == 0:
        return
    q = y.copy()
    yield (factor * q).reshape(shape)
    for m in range(1, m_max):
        q_prev, q = q, (y * q - root[m] * q_prev) / root[m + 1]
        big = np.abs(q) > _RESCALE_AT
        if big.any():
            q[big] = np.ldexp(q[big], -_RESCALE_BITS)
            q_prev[big] = np.ldexp(q_prev[big], -_RESCALE_BITS)
            exp2[big] += _RESCALE_BITS
            factor = np.exp(exp2 * _LN2 - half_sq)
        yield (factor * q).reshape(shape)


def gaussian_kernel(s, x):
    """``p_s(x) = exp(-x^2 / (2 s)) / sqrt(2 pi s)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("variance must be positive")
    x = np.asarray(x, dtype=float)
    return (np.exp(-0.5 * x * x / s) / np.sqrt(2.0 * np.pi * s))[()]


def gaussian_kernel_d(s, x) -> float:
    """Product of one-dimensional kernels over the coordinates of ``x``."""
    x = np.asarray(x, dtype=float)
    return float(np.prod(gaussian_kernel(s, x)))


def log_bound_constant(n):
    """``log c_n`` with ``c_n = 2^{n/2} (2 / (n! pi)) Gamma((n + 1) / 2)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise DomainError("degree must be non-negative")
    return (0.5 * n * _LN2 + _LN2 - gammaln(n + 1.0) - math.log(math.pi) + gammaln(0.5 * (n + 1.0)))[()]


def bound_constant(n):
    """``c_n``, the uniform bound on ``|H_n(y) exp(-y^2/2)|``."""
    return np.exp(log_bound_constant(n))[()]


def scaled_bound(n):
    """``n! c_n^2``, evaluated in log space (no overflow for large n)."""
    n = np.asarray(n, dtype=float)
    return np.exp(gammaln(n + 1.0) + 2.0 * log_bound_constant(n))[()]


def stirling_ratio(n):
    """``n! c_n^2 sqrt(n)``; tends to :data:`STIRLING_LIMIT`."""
    n = np.asarray(n, dtype=float)
    return (scaled_bound(n) * np.sqrt(n))[()]


def bound_margin(n_max: int, y) -> np.ndarray:
    """For each n <= n_max: max over ``y`` of ``|H_n(y) e^{-y^2/2}| / c_n``.

    Computed as ``|G_n| / sqrt(n! c_n^2)`` so that large degrees do not
    underflow. A value <= 1 means the bound holds on the sample.
    """
    scale = np.sqrt(scaled_bound(np.arange(n_max + 1)))
    out = np.empty(n_max + 1)
    for n, g in enumerate(weighted_hermite(y, n_max)):
        out[n] = np.max(np.abs(g)) / scale[n]
    return out


class IdentityResidual(NamedTuple):
    lhs: float
    rhs: float
    ratio: float


def hermite_gaussian_identity_residual(n: int, y: float, quad_tol: float = 1e-10) -> IdentityResidual:
    """Evaluate both sides of the oscillatory-integral representation of
    ``H_n(y) exp(-y^2/2)``.

    The right side is
    ``(-1)^{floor(n/2)} 2^{n/2} (2 / (n! pi)) int_0^inf u^n e^{-u^2} g(u y sqrt 2) du``
    with ``g = cos`` for even n and ``sin`` for odd n. The integral uses
    QUADPACK's Fourier-weight routine on the half line.
    """
    if n < 0:
        raise DomainError("degree must be non-negative")
    if quad_tol <= 0:
        raise ValueError("quad_tol must be positive")
    lhs = float(hermite(n, y) * math.exp(-0.5 * y * y))
    omega = y * math.sqrt(2.0)
    weight = "cos" if n % 2 == 0 else "sin"

    def f(u):
        return u**n * math.exp(-u * u)

    if omega == 0.0:
        if weight == "sin":
            integral, err = 0.0, 0.0
        else:
            integral, err = integrate.quad(f, 0.0, np.inf, epsabs=quad_tol, epsrel=0.0)
    else:
        integral, err = integrate.quad(
            f, 0.0, np.inf, weight=weight, wvar=abs(omega), epsabs=quad_tol, limlst=100
        )
        if weight == "sin" and omega < 0:
            integral = -integral
    if not err <= quad_tol:
        raise ToleranceError(f"identity integral n={n}, y={y}: error estimate {err:.3g} > {quad_tol:.3g}")
    sign = -1.0 if (n // 2) % 2 else 1.0
    rhs = sign * 2.0 ** (0.5 * n) * 2.0 / (math.factorial(n) * math.pi) * integral
    ratio = rhs / lhs if lhs != 0.0 else math.nan
    return IdentityResidual(lhs, rhs, ratio)
