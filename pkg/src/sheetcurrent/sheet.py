"""Brownian sheet sample paths on rectangular partitions of the unit square.

A sheet is built from independent Gaussian rectangle increments: with
``z`` i.i.d. standard normal,

    W[k, i, j] = sum_{i' < i, j' < j} sqrt(ds[i'] * dt[j']) * z[k, i', j']

which reproduces the covariance min(s, s') * min(t, t') exactly at the
grid nodes and vanishes on both axes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidGridError
from .rng import map_replicas, replica_rng

__all__ = [
    "MAX_COMPONENTS",
    "GridSpec",
    "SheetPath",
    "simulate_sheet",
    "simulate_batch",
    "horizontal_increment",
    "vertical_increment",
    "quadratic_variation_row",
    "corner_increments",
    "write_path_csv",
    "read_path_csv",
    "node_covariance",
    "run_batches",
]

MAX_COMPONENTS = 8


def _check_nodes(nodes: np.ndarray, name: str) -> None:
    if nodes.ndim != 1 or nodes.size < 2:
        raise InvalidGridError(f"{name} needs at least two nodes")
    if not np.all(np.isfinite(nodes)):
        raise InvalidGridError(f"{name} contains non-finite values")
    if nodes[0] != 0.0 or nodes[-1] != 1.0:
        raise InvalidGridError(f"{name} must start at 0 and end at 1")
    if np.any(np.diff(nodes) <= 0.0):
        raise InvalidGridError(f"{name} must be strictly increasing")


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Partition 0 = s_0 < ... < s_N = 1 times 0 = t_0 < ... < t_M = 1."""

    s_nodes: np.ndarray
    t_nodes: np.ndarray

    def __post_init__(self):
        s = np.array(self.s_nodes, dtype=float)
        t = np.array(self.t_nodes, dtype=float)
        _check_nodes(s, "s_nodes")
        _check_nodes(t, "t_nodes")
        s.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "t_nodes", t)

    @classmethod
    def uniform(cls, n_s: int, n_t: Optional[int] = None) -> "GridSpec":
        n_t = n_s if n_t is None else n_t
        if int(n_s) < 1 or int(n_t) < 1:
            raise InvalidGridError("cell counts must be >= 1")
        s = np.arange(n_s + 1, dtype=float) / n_s
        t = np.arange(n_t + 1, dtype=float) / n_t
        return cls(s, t)

    @property
    def n_s(self) -> int:
        return self.s_nodes.size - 1

    @property
    def n_t(self) -> int:
        return self.t_nodes.size - 1

    @property
    def ds(self) -> np.ndarray:
        return np.diff(self.s_nodes)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.t_nodes)

    def refine(self, factor: int) -> "GridSpec":
        """Split every cell into ``factor`` equal pieces along both axes."""
        def split(nodes):
            frac = np.arange(factor, dtype=float) / factor
            inner = (nodes[:-1, None] + np.diff(nodes)[:, None] * frac[None, :]).ravel()
            return np.append(inner, 1.0)
        return GridSpec(split(self.s_nodes), split(self.t_nodes))

    def __eq__(self, other):
        if not isinstance(other, GridSpec):
            return NotImplemented
        return np.array_equal(self.s_nodes, other.s_nodes) and np.array_equal(
            self.t_nodes, other.t_nodes
        )

    def __hash__(self):
        return hash((self.s_nodes.tobytes(), self.t_nodes.tobytes()))

    def __repr__(self):
        return f"GridSpec(n_s={self.n_s}, n_t={self.n_t})"


@dataclass(frozen=True)
class SheetPath:
    """Sheet values ``values[k, i, j] = W^(k)(s_i, t_j)``; read-only."""

    grid: GridSpec
    values: np.ndarray
    seed: int
    replica: int = 0
    components: int = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[1:] != (self.grid.n_s + 1, self.grid.n_t + 1):
            raise ValueError("values must have shape (d, N + 1, M + 1)")
        if v.flags.writeable:
            v = v.copy()
            v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "components", v.shape[0])

    def component(self, k: int = 0) -> np.ndarray:
        return self.values[k]


def _check_components(d: int) -> None:
    if int(d) != d or d < 1:
        raise ValueError("component count d must be a positive integer")
    if d > MAX_COMPONENTS:
        raise ValueError(f"component count d={d} exceeds the cap {MAX_COMPONENTS}")


def _build(grid: GridSpec, z: np.ndarray) -> np.ndarray:
    # z: (..., N, M) standard normals -> (..., N + 1, M + 1) sheet values
    scale = np.sqrt(np.outer(grid.ds, grid.dt))
    w = np.cumsum(np.cumsum(z * scale, axis=-2), axis=-1)
    pad = [(0, 0)] * (w.ndim - 2) + [(1, 0), (1, 0)]
    return np.pad(w, pad)


def simulate_sheet(grid: GridSpec, d: int = 1, seed: int = 0, replica: int = 0) -> SheetPath:
    """One sheet path; identical ``(grid, d, seed, replica)`` give identical bits."""
    if not isinstance(grid, GridSpec):
        raise InvalidGridError("grid must be a GridSpec")
    _check_components(d)
    rng = replica_rng(seed, replica)
    z = rng.standard_normal((d, grid.n_s, grid.n_t))
    return SheetPath(grid, _build(grid, z), seed, replica)


def simulate_batch(grid: GridSpec, d: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Values of replicas ``start .. stop - 1`` stacked as (R, d, N + 1, M + 1).

    Replica ``r`` here is bit-identical to ``simulate_sheet(grid, d, seed, r)``.
    """
    _check_components(d)
    z = np.empty((stop - start, d, grid.n_s, grid.n_t))
    for k, r in enumerate(range(start, stop)):
        z[k] = replica_rng(seed, r).standard_normal((d, grid.n_s, grid.n_t))
    return _build(grid, z)


def _check_node(path: SheetPath, i: int, j: int, i_max: int, j_max: int) -> None:
    if not (0 <= i <= i_max and 0 <= j <= j_max):
        raise IndexError(f"node ({i}, {j}) outside 0..{i_max} x 0..{j_max}")


def horizontal_increment(path: SheetPath, i: int, j: int, component: int = 0) -> float:
    """W(s_{i+1}, t_j) - W(s_i, t_j)."""
    _check_node(path, i, j, path.grid.n_s - 1, path.grid.n_t)
    w = path.values[component]
    return float(w[i + 1, j] - w[i, j])


def vertical_increment(path: SheetPath, i: int, j: int, component: int = 0) -> float:
    """W(s_i, t_{j+1}) - W(s_i, t_j)."""
    _check_node(path, i, j, path.grid.n_s, path.grid.n_t - 1)
    w = path.values[component]
    return float(w[i, j + 1] - w[i, j])


def quadratic_variation_row(path: SheetPath, component: int, t_index: int) -> float:
    """Sum over i of (W(s_{i+1}, t_j) - W(s_i, t_j))^2 along row ``t_index``."""
    if not 0 <= component < path.components:
        raise IndexError(f"component {component} out of range")
    if not 0 <= t_index <= path.grid.n_t:
        raise IndexError(f"t_index {t_index} out of range")
    row = path.values[component, :, t_index]
    return float(np.sum(np.diff(row) ** 2))


def corner_increments(values: np.ndarray):
    """Split sheet values (..., N + 1, M + 1) into Riemann-sum factors.

    Returns ``(corner, horiz, vert)`` each of shape (..., N, M): the value
    at (s_i, t_j), the increment to the right and the increment above.
    """
    corner = values[..., :-1, :-1]
    horiz = values[..., 1:, :-1] - corner
    vert = values[..., :-1, 1:] - corner
    return corner, horiz, vert


def write_path_csv(path: SheetPath, dest) -> Path:
    """Dump a path as ``component,i,j,s,t,value`` rows, row-major."""
    dest = Path(dest)
    s, t = path.grid.s_nodes, path.grid.t_nodes
    with dest.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["component", "i", "j", "s", "t", "value"])
        for k in range(path.components):
            for i in range(s.size):
                for j in range(t.size):
                    out.writerow(
                        [k, i, j, f"{s[i]:.17g}", f"{t[j]:.17g}", f"{path.values[k, i, j]:.17g}"]
                    )
    return dest


def read_path_csv(src, seed: int = 0) -> SheetPath:
    """Inverse of :func:`write_path_csv` for paths on any grid."""
    rows = list(csv.DictReader(Path(src).open(newline="")))
    d = 1 + max(int(r["component"]) for r in rows)
    s_map = {int(r["i"]): float(r["s"]) for r in rows}
    t_map = {int(r["j"]): float(r["t"]) for r in rows}
    grid = GridSpec([s_map[i] for i in sorted(s_map)], [t_map[j] for j in sorted(t_map)])
    values = np.zeros((d, grid.n_s + 1, grid.n_t + 1))
    for r in rows:
        values[int(r["component"]), int(r["i"]), int(r["j"])] = float(r["value"])
    return SheetPath(grid, values, seed)


def node_covariance(grid: GridSpec, a: Sequence[int], b: Sequence[int]) -> float:
    """Target covariance min(s, s') * min(t, t') between nodes ``a`` and ``b``."""
    s, t = grid.s_nodes, grid.t_nodes
    return float(min(s[a[0]], s[b[0]]) * min(t[a[1]], t[b[1]]))


def run_batches(grid: GridSpec, d: int, seed: int, replicas: int, statistic, threads=None):
    """Apply ``statistic`` to every replica's values, in deterministic chunks.

    ``statistic`` maps a (R, d, N + 1, M + 1) array to an array with leading
    axis R.
    """
    return map_replicas(
        lambda lo, hi: statistic(simulate_batch(grid, d, seed, lo, hi)), replicas, threads
    )
