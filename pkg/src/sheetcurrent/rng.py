"""Replica random streams and the deterministic Monte Carlo runner.

Every replica ``r`` of a run seeded with ``seed`` draws from its own
Philox4x64 stream: the key is the 64-bit seed and the replica index sits
in the high words of the 256-bit counter, so streams never overlap and
can be regenerated in any order. Work is cut into fixed-size chunks whose
boundaries depend only on the replica count, never on the thread count,
and reductions use exactly rounded sums. Together these make every
estimate bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "THREADS_ENV",
    "CHUNK_SIZE",
    "EstimatorResult",
    "replica_rng",
    "default_threads",
    "map_replicas",
    "summarize",
    "exact_mean",
]

THREADS_ENV = "SHEETCURRENT_THREADS"
CHUNK_SIZE = 256

_MASK64 = (1 << 64) - 1


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Generator for one replica; depends only on ``(seed, replica)``."""
    if seed < 0 or replica < 0:
        raise ValueError("seed and replica must be non-negative")
    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    counter = np.array([0, 0, replica & _MASK64, (replica >> 64) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def default_threads() -> int:
    """Thread count from ``SHEETCURRENT_THREADS``, else the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return value
    return os.cpu_count() or 1


def map_replicas(
    chunk_fn: Callable[[int, int], np.ndarray],
    replicas: int,
    threads: Optional[int] = None,
    chunk_size: int = CHUNK_SIZE,
) -> np.ndarray:
    """Evaluate ``chunk_fn(start, stop)`` over fixed chunks and stack in order.

    ``chunk_fn`` must return an array whose first axis has ``stop - start``
    entries, one per replica.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    bounds = [(lo, min(lo + chunk_size, replicas)) for lo in range(0, replicas, chunk_size)]
    if threads == 1 or len(bounds) == 1:
        parts = [chunk_fn(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: chunk_fn(*b), bounds))
    return np.concatenate(parts, axis=0)


def exact_mean(values) -> complex | float:
    """Mean of a 1-D real or complex sample from a correctly rounded sum."""
    values = np.asarray(values)
    n = values.shape[0]
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()) / n, math.fsum(values.imag.tolist()) / n)
    return math.fsum(values.tolist()) / n


@dataclass(frozen=True)
class EstimatorResult:
    mean: complex
    std_error: float
    replicas: int
    seed: int
    exact_reference: Optional[float] = None

    @property
    def z_score(self) -> float:
        """Distance of the real mean from the reference in standard errors."""
        if self.exact_reference is None:
            return math.nan
        gap = abs(self.mean.real - self.exact_reference)
        if self.std_error == 0.0:
            return 0.0 if gap == 0.0 else math.inf
        return gap / self.std_error

    def within(self, n_se: float = 3.0) -> bool:
        return self.z_score <= n_se

    def to_dict(self) -> dict:
        return {
            "mean_re": self.mean.real,
            "mean_im": self.mean.imag,
            "std_error": self.std_error,
            "replicas": self.replicas,
            "seed": self.seed,
            "exact_reference": self.exact_reference,
        }


def summarize(values, seed: int, exact_reference: Optional[float] = None) -> EstimatorResult:
    """Mean and standard error of per-replica samples (real or complex).

    For complex samples the variance is E|X - mean|^2.
    """
    values = np.asarray(values)
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least two replicas for a standard error")
    mean = exact_mean(values)
    dev = np.abs(values - mean) ** 2
    var = math.fsum(dev.tolist()) / (n - 1)
    return EstimatorResult(
        mean=complex(mean),
        std_error=math.sqrt(var / n),
        replicas=n,
        seed=seed,
        exact_reference=exact_reference,
    )
