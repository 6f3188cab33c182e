"""Convergence reports and their CSV / JSON serializations."""

from __future__ import annotations

import csv
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import scipy

__all__ = ["ReportRow", "ConvergenceReport", "format_number", "write_csv", "clean_json", "versions"]

PASS, FAIL, INFO = "pass", "fail", "info"


def format_number(v) -> str:
    """17 significant digits, '.' separator, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(v)


def write_csv(dest, header: List[str], rows) -> Path:
    dest = Path(dest)
    with dest.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([format_number(v) for v in row])
    return dest


def versions() -> Dict[str, str]:
    from . import __version__

    return {
        "sheetcurrent": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


@dataclass
class ReportRow:
    label: str
    size: Optional[int]
    exact: Optional[float]
    mc: Optional[float] = None
    mc_stderr: Optional[float] = None
    target: Optional[float] = None
    status: str = INFO

    @property
    def gap(self) -> Optional[float]:
        if self.exact is None or self.target is None:
            return None
        return abs(self.exact - self.target)

    def as_list(self):
        return [self.label, self.size, self.exact, self.mc, self.mc_stderr, self.target, self.gap, self.status]


@dataclass
class ConvergenceReport:
    subcommand: str
    rows: List[ReportRow] = field(default_factory=list)
    seed: int = 0
    payload: Dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    failures: List[str] = field(default_factory=list)

    HEADER = ["label", "size", "exact", "mc", "mc_stderr", "target", "gap", "status"]

    def add(self, row: ReportRow) -> None:
        self.rows.append(row)
        if row.status == FAIL:
            self.failures.append(f"{row.label} (size {row.size})")

    def check(self, ok: bool, label: str, size=None, exact=None, mc=None, mc_stderr=None, target=None) -> bool:
        self.add(ReportRow(label, size, exact, mc, mc_stderr, target, PASS if ok else FAIL))
        return ok

    @property
    def passed(self) -> bool:
        return not self.failures

    def sorted_rows(self) -> List[ReportRow]:
        # stable: rows of one size keep their insertion order
        return sorted(self.rows, key=lambda r: -1 if r.size is None else r.size)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "passed": self.passed,
            "failures": self.failures,
            "columns": self.HEADER,
            "rows": [r.as_list() for r in self.sorted_rows()],
            "payload": self.payload,
            "metadata": {"seed": self.seed, "versions": versions()},
        }

    def write(self, out_dir) -> List[Path]:
        """``<sub>.csv`` and ``<sub>.json`` (byte-reproducible) plus ``<sub>.timing.json``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(out_dir / f"{self.subcommand}.csv", self.HEADER, (r.as_list() for r in self.sorted_rows()))
        json_path = out_dir / f"{self.subcommand}.json"
        json_path.write_text(json.dumps(clean_json(self.to_dict()), indent=2) + "\n")
        timing = out_dir / f"{self.subcommand}.timing.json"
        timing.write_text(json.dumps({"wall_time_s": self.wall_time}) + "\n")
        return [csv_path, json_path, timing]


def clean_json(v):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf", "nan"."""
    if isinstance(v, dict):
        return {str(k): clean_json(e) for k, e in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [clean_json(e) for e in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else format_number(v)
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return v
