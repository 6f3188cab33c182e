"""Chaos coefficients of the Dirac delta along the sheet.

For a sheet value ``W(u, v)`` with variance ``uv`` the delta functional
expands as ``sum_m a_m(u, v; x) I_m(1_{[0,u]x[0,v]}^{(x)m})`` with

    a_m(u, v; x) = (uv)^{-m/2} p_{uv}(x) H_m(x / sqrt(uv)).

Numerically the coefficient is almost always used through the bounded
combination ``g_m = a_m (uv)^{(m+1)/2} = p_{uv}(x) H_m(x/sqrt(uv)) sqrt(uv)``,
which equals ``H_m(y) exp(-y^2/2) / sqrt(2 pi)`` with ``y = x / sqrt(uv)``.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .errors import DomainError, PreconditionError
from .hermite import gaussian_kernel, hermite, orthonormal_hermite, weighted_hermite
from .quadrature import composite_rule

__all__ = [
    "delta_coeff",
    "delta_coeff_stable",
    "delta_coeff_fourier",
    "delta_coeff_fourier_quadrature",
    "tensor_multiple_integral",
    "truncated_delta",
    "truncated_delta_d",
    "truncation_second_moment",
    "symmetrize_partial",
    "permutation_average",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_MINUS_I_POW = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


def delta_coeff(m: int, u1, v2, x):
    """Raw coefficient ``a_m(u1, v2; x)``; requires ``u1 * v2 > 0``."""
    if m < 0:
        raise DomainError("chaos level must be non-negative")
    vol = np.asarray(u1, dtype=float) * np.asarray(v2, dtype=float)
    if np.any(vol <= 0.0):
        raise DomainError("a_m(u, v) needs u * v > 0; use delta_coeff_stable near the axes")
    y = np.asarray(x, dtype=float) / np.sqrt(vol)
    return (vol ** (-0.5 * m) * gaussian_kernel(vol, x) * hermite(m, y))[()]


def delta_coeff_stable(m: int, u1, v2, x):
    """``g_m = p_{uv}(x) H_m(x / sqrt(uv)) sqrt(uv)``, extended to ``uv = 0``.

    The removable limit at ``uv -> 0`` is 0 for ``x != 0`` and
    ``H_m(0) / sqrt(2 pi)`` for ``x = 0`` (1/sqrt(2 pi) at m = 0, 0 for odd m).
    """
    if m < 0:
        raise DomainError("chaos level must be non-negative")
    vol = np.asarray(u1, dtype=float) * np.asarray(v2, dtype=float)
    x = np.broadcast_to(np.asarray(x, dtype=float), vol.shape)
    if np.any(vol < 0.0):
        raise DomainError("u * v must be non-negative")
    inside = vol > 0.0
    y = np.where(inside, x / np.sqrt(np.where(inside, vol, 1.0)), 0.0)
    g = None
    for g in weighted_hermite(y, m):
        pass
    out = g * math.exp(-0.5 * math.lgamma(m + 1.0)) * _INV_SQRT_2PI
    limit = np.where(x == 0.0, float(hermite(m, 0.0)) * _INV_SQRT_2PI, 0.0)
    return np.where(inside, out, limit)[()]


def delta_coeff_fourier(m: int, volume: float, x: float) -> complex:
    """Fourier transform in x: ``exp(-x^2 |s| / 2) (-i)^m x^m / m!``."""
    if m < 0:
        raise DomainError("chaos level must be non-negative")
    if volume < 0:
        raise DomainError("volume must be non-negative")
    damp = math.exp(-0.5 * x * x * volume)
    if m == 0:
        mag = 1.0
    elif x == 0.0:
        mag = 0.0
    else:
        mag = math.exp(m * math.log(abs(x)) - math.lgamma(m + 1.0))
        if x < 0 and m % 2:
            mag = -mag
    return _MINUS_I_POW[m % 4] * (damp * mag)


def delta_coeff_fourier_quadrature(
    m: int, u1: float, v2: float, x: float, half_width: float = 40.0, panels: int = 400, order: int = 16
) -> complex:
    """``int e^{-i x y} a_m(u1, v2; y) dy`` over ``|y| <= half_width sqrt(u1 v2)``.

    Direct composite Gauss-Legendre, independent of the closed form.
    """
    vol = u1 * v2
    lim = half_width * math.sqrt(vol)
    y, w = composite_rule(np.linspace(-lim, lim, panels + 1), order)
    a = delta_coeff(m, u1, v2, y)
    return complex(np.sum(w * a * np.cos(x * y)), -np.sum(w * a * np.sin(x * y)))


def tensor_multiple_integral(n: int, s: float, t: float, w):
    """``I_n(1_{[0,s]x[0,t]}^{(x)n}) = n! (st)^{n/2} H_n(w / sqrt(st))`` pathwise."""
    if n < 0:
        raise DomainError("order must be non-negative")
    w = np.asarray(w, dtype=float)
    if n == 0:
        return np.ones_like(w)[()]
    vol = s * t
    if vol <= 0.0:
        raise DomainError("multiple integral of order >= 1 needs s * t > 0")
    q = None
    for q in orthonormal_hermite(w / math.sqrt(vol), n):
        pass
    # n! (st)^{n/2} H_n = sqrt(n!) (st)^{n/2} q_n
    return (q * math.exp(0.5 * math.lgamma(n + 1.0) + 0.5 * n * math.log(vol)))[()]


def truncated_delta(x: float, s: float, t: float, w, m_max: int):
    """Chaos expansion of ``delta(x - W_{s,t})`` cut after level ``m_max``.

    Term m equals ``p_{st}(x) m! H_m(x/sqrt(st)) H_m(w/sqrt(st))``, evaluated
    as ``G_m(x/sqrt(st)) q_m(w/sqrt(st)) / sqrt(2 pi st)``.
    """
    if m_max < 0:
        raise DomainError("m_max must be non-negative")
    vol = s * t
    if vol <= 0.0:
        raise DomainError("truncated delta needs s * t > 0")
    w = np.asarray(w, dtype=float)
    root = math.sqrt(vol)
    g_levels = [float(g) for g in weighted_hermite(x / root, m_max)]
    total = np.zeros_like(w)
    for g, q in zip(g_levels, orthonormal_hermite(w / root, m_max)):
        total = total + g * q
    return (total * (_INV_SQRT_2PI / root))[()]


def truncated_delta_d(x: Sequence[float], s: float, t: float, w, caps: Sequence[int]):
    """Product of per-component truncated deltas, component k cut at ``caps[k]``.

    ``w`` has the component index on its first axis.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if len(caps) != x.size or w.shape[0] != x.size:
        raise ValueError("x, w and caps must agree on the component count")
    out = np.ones(w.shape[1:])
    for k in range(x.size):
        out = out * truncated_delta(float(x[k]), s, t, w[k], int(caps[k]))
    return out[()]


def truncation_second_moment(x: float, s: float, t: float, m_lo: int, m_hi: int) -> float:
    """``sum_{m_lo < m <= m_hi} m! a_m^2 (st)^m``, the exact second moment of
    ``truncated_delta(m_hi) - truncated_delta(m_lo)``."""
    vol = s * t
    total = 0.0
    for m, g in enumerate(weighted_hermite(x / math.sqrt(vol), m_hi)):
        if m > m_lo:
            total += float(g) ** 2
    return total / (2.0 * math.pi * vol)


def _check_partial_symmetry(f: np.ndarray, m: int) -> None:
    exact = f.dtype == object or np.issubdtype(f.dtype, np.integer)
    for k in range(m - 1):
        perm = list(range(f.ndim))
        perm[k], perm[k + 1] = perm[k + 1], perm[k]
        g = np.transpose(f, perm)
        same = np.array_equal(f, g) if exact else np.allclose(f, g, rtol=1e-12, atol=1e-14)
        if not same:
            raise PreconditionError(f"table is not symmetric in arguments {k + 1} and {k + 2}")


def symmetrize_partial(f, m: int) -> np.ndarray:
    """Symmetrize a table on ``m + 2`` arguments that is already symmetric in
    its first ``m``.

    ``out(a_1..a_{m+2}) = 1/((m+1)(m+2)) sum_{k != l} f(a without a_k, a_l; a_k, a_l)``,
    the remaining arguments kept in their original order. ``f`` is an
    array with ``m + 2`` axes of equal length; object arrays of
    ``fractions.Fraction`` give exact results.
    """
    f = np.asarray(f)
    if m < 0 or f.ndim != m + 2:
        raise PreconditionError(f"expected a table with {m + 2} axes, got {f.ndim}")
    if len(set(f.shape)) > 1:
        raise PreconditionError("all arguments must range over the same domain")
    _check_partial_symmetry(f, m)
    n = m + 2
    total = None
    for k, l in itertools.permutations(range(n), 2):
        rest = [a for a in range(n) if a not in (k, l)]
        # argsort inverts the argument order, so term[a] = f[a[rest], a_k, a_l]
        term = np.transpose(f, np.argsort(rest + [k, l]))
        total = term if total is None else total + term
    return total / ((m + 1) * (m + 2))


def permutation_average(f) -> np.ndarray:
    """Average of ``f`` over all permutations of its arguments (brute force)."""
    f = np.asarray(f)
    total = None
    count = 0
    for perm in itertools.permutations(range(f.ndim)):
        term = np.transpose(f, np.argsort(perm))
        total = term if total is None else total + term
        count += 1
    return total / count
