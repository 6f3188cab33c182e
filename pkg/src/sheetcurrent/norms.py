"""Watanabe-norm series of the current and of its Riemann-sum error.

Level m of the current contributes ``weight(m) * m! * int int g_m(u,v)^2 du dv``
with ``g_m`` the stable delta coefficient. Since ``m! g_m^2 = G_m(y)^2 / (2 pi)``
with ``y = x / sqrt(uv)``, each level integral depends on ``uv`` alone
and is computed in one dimension:

    int_0^1 int_0^1 F(uv) du dv = int_0^1 F(w) (-log w) dw,

then mapped to ``y`` where ``G_m`` is smooth and Gaussian-damped. Every
level is bounded by ``m! c_m^2 / (2 pi)``, which gives rigorous tails.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .hermite import STIRLING_LIMIT, scaled_bound, weighted_hermite
from .quadrature import cell_rule, composite_rule
from .sheet import GridSpec

__all__ = [
    "WeightConvention",
    "SeriesParams",
    "SeriesResult",
    "BoundCheck",
    "LEVEL_BOUND_CONSTANT",
    "level_bound",
    "weight",
    "xi_level_integrals",
    "bound_tail",
    "bounding_series",
    "watanabe_norm_xi",
    "error_brackets",
    "approximation_error_norm",
    "per_term_bound_check",
    "per_term_bound_checks",
]

_TWO_PI = 2.0 * math.pi
# G_m(y)^2 <= 1.2 exp(-y^2 / 2): negligible past this argument
_Y_CUTOFF = 40.0
_DIRECT_TAIL_TERMS = 1_000_000
# below this |x| every level integral equals its value at x = 0 in double precision
_ORIGIN_CUTOFF = 1e-100


class WeightConvention(str, enum.Enum):
    """Offset in the level weight ``(offset + m)^alpha``."""

    ONE_PLUS_M = "OnePlusM"
    THREE_PLUS_M = "ThreePlusM"

    @property
    def offset(self) -> int:
        return 1 if self is WeightConvention.ONE_PLUS_M else 3


def weight(m, alpha: float, convention=WeightConvention.THREE_PLUS_M):
    convention = WeightConvention(convention)
    return (np.asarray(m, dtype=float) + convention.offset) ** alpha


@dataclass(frozen=True)
class SeriesParams:
    alpha: float = -0.6
    m_max: int = 200
    quad_order: int = 16
    weight_convention: WeightConvention = WeightConvention.THREE_PLUS_M
    quad_tol: float = 1e-8
    ceiling: float = 1e6

    def __post_init__(self):
        if self.m_max < 0:
            raise ValueError("m_max must be >= 0")
        if self.quad_order < 2:
            raise ValueError("quad_order must be >= 2")
        object.__setattr__(self, "weight_convention", WeightConvention(self.weight_convention))


@dataclass
class SeriesResult:
    partial_sum: float
    tail_bound: float
    per_term: List[Tuple[int, float]]
    converged: bool
    alpha: float
    weight_convention: WeightConvention
    m_max: int
    quad_error: float = 0.0
    accurate: bool = True
    breakdown: List[Tuple[int, float, float, float]] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "weight_convention": WeightConvention(self.weight_convention).value,
            "m_max": self.m_max,
            "partial_sum": self.partial_sum,
            "tail_bound": self.tail_bound,
            "terms": [[m, v] for m, v in self.per_term],
            "converged": self.converged,
            "quad_error": self.quad_error,
            "accurate": self.accurate,
        }
        if self.breakdown:
            out["breakdown"] = [list(row) for row in self.breakdown]
        return out


def _level_integrals_1d(x: float, m_max: int, order: int) -> np.ndarray:
    ax = abs(x)
    if ax < _ORIGIN_CUTOFF:
        g = np.array([float(v) for v in weighted_hermite(0.0, m_max)])
        return g * g / _TWO_PI
    if ax >= _Y_CUTOFF:
        return np.zeros(m_max + 1)
    # geometric panels where log(y/|x|)/y^3 varies on the scale of y,
    # then panels short enough to resolve the oscillations of G_m
    knee = max(ax, 1.0)
    edges = [ax]
    if knee > ax:
        edges = list(np.geomspace(ax, knee, max(2, int(math.ceil(4 * math.log2(knee / ax))) + 1)))
    n_uniform = int(math.ceil((_Y_CUTOFF - knee) * math.sqrt(m_max + 1) / 1.5)) + 16
    edges = np.concatenate([edges[:-1], np.linspace(knee, _Y_CUTOFF, n_uniform + 1)])
    y, w = composite_rule(edges, order)
    # dw (-log w) with w = x^2 / y^2  ->  4 x^2 log(y/|x|) / y^3 dy
    ratio = ax / y
    jac = w * 4.0 * ratio * ratio * np.log(y / ax) / y
    out = np.empty(m_max + 1)
    for m, g in enumerate(weighted_hermite(y, m_max)):
        out[m] = float(np.dot(jac, g * g))
    return out / _TWO_PI


def xi_level_integrals(x: float, m_max: int, order: int = 16):
    """``m! int int g_m^2`` for m = 0 .. m_max, with an error estimate.

    Returns ``(values, error)`` where ``error`` is the largest per-level
    difference between rules of order ``order`` and ``order + 8``.
    """
    low = _level_integrals_1d(x, m_max, order)
    high = _level_integrals_1d(x, m_max, order + 8)
    return high, float(np.max(np.abs(high - low)))


def bound_tail(alpha: float, convention, m_from: int) -> float:
    """Rigorous ``(1/2pi) sum_{m > m_from} weight(m) m! c_m^2``; inf if divergent.

    A million terms are summed directly, the rest are bounded with
    ``m! c_m^2 <= STIRLING_LIMIT / sqrt(m)`` and ``weight(m) <= m^alpha``.
    """
    if alpha >= -0.5:
        return math.inf
    m = np.arange(m_from + 1, m_from + _DIRECT_TAIL_TERMS + 1, dtype=float)
    direct = math.fsum((weight(m, alpha, convention) * scaled_bound(m)).tolist())
    k = float(m_from + _DIRECT_TAIL_TERMS)
    rest = STIRLING_LIMIT * k ** (alpha + 0.5) / (-alpha - 0.5)
    return (direct + rest) * (1.0 + 1e-9) / _TWO_PI


def bounding_series(alpha: float, m_max: int, convention=WeightConvention.THREE_PLUS_M) -> np.ndarray:
    """Partial sums ``(1/2pi) sum_{m <= M} weight(m) m! c_m^2`` for M = 0 .. m_max."""
    m = np.arange(m_max + 1, dtype=float)
    return np.cumsum(weight(m, alpha, convention) * scaled_bound(m)) / _TWO_PI


def _truncation_level(params: SeriesParams, scale: float = 1.0) -> int:
    m = np.arange(params.m_max + 1, dtype=float)
    bound_terms = scale * weight(m, params.alpha, params.weight_convention) * scaled_bound(m) / _TWO_PI
    running = np.cumsum(bound_terms)
    small = np.nonzero(bound_terms[1:] < 1e-14 * running[:-1])[0]
    return int(small[0]) if small.size else params.m_max


def watanabe_norm_xi(x: float, params: SeriesParams = SeriesParams()) -> SeriesResult:
    """Squared Watanabe norm of the current at ``x``, truncated with a tail bound."""
    m_stop = _truncation_level(params)
    levels, qerr = xi_level_integrals(x, m_stop, params.quad_order)
    m = np.arange(m_stop + 1)
    terms = weight(m, params.alpha, params.weight_convention) * levels
    partial = math.fsum(terms.tolist())
    tail = bound_tail(params.alpha, params.weight_convention, m_stop)
    weighted_err = float(np.sum(weight(m, params.alpha, params.weight_convention))) * qerr
    converged = math.isfinite(tail) and partial < params.ceiling
    return SeriesResult(
        partial_sum=partial,
        tail_bound=tail,
        per_term=[(int(k), float(v)) for k, v in zip(m, terms)],
        converged=converged,
        alpha=params.alpha,
        weight_convention=params.weight_convention,
        m_max=m_stop,
        quad_error=weighted_err,
        accurate=weighted_err <= params.quad_tol,
    )


@dataclass
class _CellRule:
    g_scale: np.ndarray   # quadrature weight per point, (K, Q)
    root_ratio: np.ndarray  # sqrt(s_i t_j / (u v)) per point, (K, Q)
    y: np.ndarray         # x / sqrt(uv) per point, (K, Q)


def _graded_cell_rule(lo: np.ndarray, hi: np.ndarray, order: int):
    """Per-cell rule on geometric sub-panels with end ratio <= 2.

    The factor (corner / point)^{(m+1)/2} decays like a power of the
    coordinate, which geometric panels resolve uniformly in m.
    """
    pieces = max(1, int(math.ceil(math.log2(float(np.max(hi / lo))) - 1e-12)))
    frac = np.arange(pieces + 1) / pieces
    edges = lo[:, None] * (hi / lo)[:, None] ** frac[None, :]
    edges[:, -1] = hi
    nodes, weights = cell_rule(edges[:, :-1].ravel(), edges[:, 1:].ravel(), order)
    return nodes.reshape(lo.size, -1), weights.reshape(lo.size, -1)


def _cell_rule(x: float, s_lo, s_hi, t_lo, t_hi, order: int) -> _CellRule:
    u, wu = _graded_cell_rule(s_lo, s_hi, order)
    v, wv = _graded_cell_rule(t_lo, t_hi, order)
    uv = u[:, None, :, None] * v[None, :, None, :]
    wts = wu[:, None, :, None] * wv[None, :, None, :]
    corner = (s_lo[:, None] * t_lo[None, :])[:, :, None, None]
    k = s_lo.size * t_lo.size
    return _CellRule(
        g_scale=wts.reshape(k, -1),
        root_ratio=np.sqrt(corner / uv).reshape(k, -1),
        y=(x / np.sqrt(uv)).reshape(k, -1),
    )


def error_brackets(x: float, grid: GridSpec, m_max: int, order: int = 16):
    """Per-level pieces of the Riemann-sum error norm, all multiplied by m!.

    Returns a dict of arrays ``S1``, ``S2``, ``S3`` (index m) and the
    quadrature error estimate of ``S2`` and ``S3``:

    * ``S1 = m! sum a_m(s_i,t_j)^2 (s_i t_j)^{m+1} ds_i dt_j``
    * ``S2 = m! sum a_m(s_i,t_j) (s_i t_j)^{m+1} int int_cell a_m(u,v) du dv``
    * ``S3 = m! int int a_m(u,v)^2 (uv)^{m+1} du dv``

    Nodes on either axis carry no term: the Riemann sum's increments there
    are identically zero, so its chaos kernel vanishes on those cells.
    """
    s, t = grid.s_nodes, grid.t_nodes
    ds, dt = grid.ds, grid.dt
    s_lo, s_hi = s[1:-1], s[2:]
    t_lo, t_hi = t[1:-1], t[2:]
    area = (ds[1:, None] * dt[None, 1:]).ravel()
    node_y = (x / np.sqrt(s_lo[:, None] * t_lo[None, :])).ravel()

    S1 = np.zeros(m_max + 1)
    S2 = np.zeros(m_max + 1)
    S2_low = np.zeros(m_max + 1)
    if node_y.size:
        rules = [_cell_rule(x, s_lo, s_hi, t_lo, t_hi, o) for o in (order, order + 8)]
        powers = [r.root_ratio.copy() for r in rules]  # ratio^{(m+1)/2}
        node_iter = weighted_hermite(node_y, m_max)
        quad_iters = [weighted_hermite(r.y, m_max) for r in rules]
        for m in range(m_max + 1):
            g_node = next(node_iter)
            S1[m] = np.dot(g_node * g_node, area)
            for k, (rule, it) in enumerate(zip(rules, quad_iters)):
                cell = np.sum(rule.g_scale * next(it) * powers[k], axis=1)
                val = np.dot(g_node, cell)
                if k == 0:
                    S2_low[m] = val
                else:
                    S2[m] = val
                powers[k] *= rule.root_ratio
        S1 /= _TWO_PI
        S2 /= _TWO_PI
        S2_low /= _TWO_PI
    S3, err3 = xi_level_integrals(x, m_max, order)
    err = np.abs(S2 - S2_low)
    return {"S1": S1, "S2": S2, "S3": S3, "error": 2.0 * err + err3}


def approximation_error_norm(x: float, grid: GridSpec, params: SeriesParams = SeriesParams()) -> SeriesResult:
    """Squared Watanabe norm of (Riemann sum - current) at ``x``, truncated at m_max.

    Each level contributes ``weight(m) (S1 - 2 S2 + S3)``, a squared L2
    distance between chaos kernels and hence non-negative. The tail bound
    uses ``S1, S3 <= m! c_m^2 / (2 pi)`` so each bracket is at most four
    times the level bound.
    """
    b = error_brackets(x, grid, params.m_max, params.quad_order)
    m = np.arange(params.m_max + 1)
    w = weight(m, params.alpha, params.weight_convention)
    brackets = b["S1"] - 2.0 * b["S2"] + b["S3"]
    terms = w * brackets
    partial = math.fsum(terms.tolist())
    qerr = float(np.sum(w * b["error"]))
    tail = 4.0 * bound_tail(params.alpha, params.weight_convention, params.m_max)
    return SeriesResult(
        partial_sum=partial,
        tail_bound=tail,
        per_term=[(int(k), float(v)) for k, v in zip(m, terms)],
        converged=math.isfinite(tail) and partial < params.ceiling,
        alpha=params.alpha,
        weight_convention=params.weight_convention,
        m_max=params.m_max,
        quad_error=qerr,
        accurate=qerr <= params.quad_tol,
        breakdown=[
            (int(k), float(a), float(c), float(d)) for k, a, c, d in zip(m, b["S1"], b["S2"], b["S3"])
        ],
    )


@dataclass(frozen=True)
class BoundCheck:
    m: int
    s1: float
    s2: float
    s3: float
    bound: float

    @property
    def passed(self) -> bool:
        return max(self.s1, abs(self.s2), self.s3) <= self.bound

    def __bool__(self):
        return self.passed


# sup_n n! c_n^2 sqrt(n) / (2 pi) with a safety factor of 2; the sequence
# increases towards its limit, so the limit is the supremum
LEVEL_BOUND_CONSTANT = 2.0 * STIRLING_LIMIT / _TWO_PI


def level_bound(m: int) -> float:
    """``C m^{-1/2}``, the bound each of S1, |S2|, S3 must respect at level m."""
    return LEVEL_BOUND_CONSTANT / math.sqrt(m)


def per_term_bound_checks(m_max: int, x: float, grid: GridSpec, order: int = 16) -> List[BoundCheck]:
    """Check ``S1, |S2|, S3 <= C m^{-1/2}`` for m = 1 .. m_max."""
    b = error_brackets(x, grid, m_max, order)
    return [
        BoundCheck(m, float(b["S1"][m]), float(b["S2"][m]), float(b["S3"][m]), level_bound(m))
        for m in range(1, m_max + 1)
    ]


def per_term_bound_check(m: int, x: float, grid: GridSpec, order: int = 16) -> BoundCheck:
    if m < 1:
        raise ValueError("m must be >= 1")
    return per_term_bound_checks(m, x, grid, order)[-1]
