"""Experiment configuration: embedded defaults, TOML files and validation.

A config file holds optional top-level keys shared by every experiment
and one optional table per subcommand::

    seed = 7
    out = "results"

    [fourier-moment]
    grid_sizes = [10, 100]
    replicas = 10000

Keys outside :class:`ExperimentConfig` and tables that are not
subcommands are rejected.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from .errors import ConfigError
from .norms import WeightConvention
from .sheet import MAX_COMPONENTS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["SUBCOMMANDS", "CRITERIA", "ExperimentConfig", "defaults_for", "load_config", "defaults_toml"]

# subcommand -> acceptance criterion it exercises
CRITERIA: Dict[str, str] = {
    "simulate": "8",
    "qv": "8",
    "watanabe-norm": "3",
    "approx-error-norm": "4",
    "fourier-moment": "1",
    "approx-error-fourier": "2",
    "multi-current": "7",
    "sobolev": "7",
    "hermite-checks": "10",
    "delta-mc": "5",
    "lemma-fourier": "6",
    "symmetrization": "9",
    "report": "1-10",
}
SUBCOMMANDS = tuple(CRITERIA)


@dataclass
class ExperimentConfig:
    subcommand: str = "report"
    grid_sizes: List[int] = field(default_factory=lambda: [16])
    replicas: int = 10_000
    seed: int = 0
    x_values: List[float] = field(default_factory=lambda: [0.5])
    alpha: List[float] = field(default_factory=lambda: [-0.6])
    r: List[float] = field(default_factory=list)
    d: List[int] = field(default_factory=lambda: [1])
    m_max: int = 64
    quad_order: int = 16
    out: str = "results"
    weight_convention: str = WeightConvention.THREE_PLUS_M.value
    threads: Optional[int] = None
    tolerance: float = 1e-6
    mc_size_limit: int = 100
    cutoffs: List[float] = field(default_factory=lambda: [10.0, 1e2, 1e3, 1e4])
    n_max: int = 200
    y_values: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])

    def validate(self) -> "ExperimentConfig":
        def bad(name, why):
            raise ConfigError(f"{self.subcommand}: field '{name}' {why}")

        if self.subcommand not in CRITERIA:
            bad("subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
        if not self.grid_sizes or any(int(n) != n or n < 1 for n in self.grid_sizes):
            bad("grid_sizes", "must be a non-empty list of positive integers")
        if self.replicas < 2:
            bad("replicas", "must be >= 2")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be an unsigned 64-bit integer")
        if any(not -1e6 < v < 1e6 for v in self.x_values):
            bad("x_values", "must be finite reals")
        if any(r <= 0 for r in self.r):
            bad("r", "must be positive")
        if not self.d or any(int(k) != k or not 1 <= k <= MAX_COMPONENTS for k in self.d):
            bad("d", f"must list integers in 1..{MAX_COMPONENTS}")
        if self.m_max < 0:
            bad("m_max", "must be >= 0")
        if self.quad_order < 2:
            bad("quad_order", "must be >= 2")
        try:
            WeightConvention(self.weight_convention)
        except ValueError:
            bad("weight_convention", "must be OnePlusM or ThreePlusM")
        if self.threads is not None and self.threads < 1:
            bad("threads", "must be >= 1")
        if self.tolerance <= 0:
            bad("tolerance", "must be positive")
        if len(self.cutoffs) < 3 or any(b <= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            bad("cutoffs", "must be at least three increasing radii")
        if self.n_max < 0:
            bad("n_max", "must be >= 0")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "simulate": {"grid_sizes": [16], "d": [1]},
    "qv": {"grid_sizes": [100, 10_000], "replicas": 10_000},
    "watanabe-norm": {"x_values": [0.0, 0.5, 1.0], "alpha": [-0.6, -0.4], "m_max": 1000},
    "approx-error-norm": {
        "x_values": [0.0, 0.5, 1.0],
        "grid_sizes": [4, 8, 16, 32, 64],
        "alpha": [-0.6],
        "m_max": 64,
    },
    "fourier-moment": {"x_values": [0.0, 0.5, 1.0, 2.0], "grid_sizes": [10, 50, 100, 500], "replicas": 10_000},
    "approx-error-fourier": {
        "x_values": [0.0, 1.0, 2.0],
        "grid_sizes": [4, 8, 16, 32, 64, 128],
        "replicas": 10_000,
        "tolerance": 1e-10,
    },
    "multi-current": {"x_values": [0.0, 0.5, 1.0], "grid_sizes": [50], "d": [3], "replicas": 10_000},
    "sobolev": {"d": [1, 2, 3]},
    "hermite-checks": {"n_max": 200, "y_values": [0.5, 1.0, 2.0], "tolerance": 1e-4},
    "delta-mc": {"x_values": [0.5, 1.0], "m_max": 12, "replicas": 100_000},
    "lemma-fourier": {"x_values": [0.5, 1.0, 2.0], "m_max": 6, "tolerance": 1e-6},
    "symmetrization": {"grid_sizes": [2, 3]},
    "report": {},
}


def _field_names() -> set:
    return {f.name for f in fields(ExperimentConfig)}


def _check_keys(table: Mapping[str, Any], where: str) -> None:
    unknown = sorted(set(table) - _field_names() - {"subcommand"})
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def defaults_for(subcommand: str, shared: Optional[Mapping[str, Any]] = None, section=None) -> ExperimentConfig:
    """Embedded defaults for ``subcommand``, overlaid with shared and section keys."""
    if subcommand not in _DEFAULTS:
        raise ConfigError(f"unknown subcommand '{subcommand}'")
    values = dict(_DEFAULTS[subcommand])
    for table, where in ((shared or {}, "top level"), (section or {}, f"[{subcommand}]")):
        _check_keys(table, where)
        values.update({k: v for k, v in table.items() if k != "subcommand"})
    try:
        cfg = ExperimentConfig(subcommand=subcommand, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path) -> Dict[str, Dict[str, Any]]:
    """Parse a TOML config into ``{"shared": {...}, subcommand: {...}}``."""
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    shared = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    _check_keys(shared, "top level")
    sections = {k: v for k, v in raw.items() if isinstance(v, dict)}
    for name, table in sections.items():
        if name not in SUBCOMMANDS:
            raise ConfigError(f"unknown section [{name}]")
        _check_keys(table, f"[{name}]")
    return {"shared": shared, **sections}


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(e) for e in v) + "]"
    return repr(v)


def defaults_toml() -> str:
    """Every embedded default as a TOML document."""
    base = ExperimentConfig().to_dict()
    base.pop("subcommand")
    lines = ["# shared defaults"] + [f"{k} = {_toml_value(v)}" for k, v in base.items()]
    for sub, table in _DEFAULTS.items():
        lines.append("")
        lines.append(f"[{sub}]  # criterion {CRITERIA[sub]}")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in table.items())
    return "\n".join(lines) + "\n"
