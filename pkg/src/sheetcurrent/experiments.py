"""One verification experiment per CLI subcommand.

Each experiment takes a validated :class:`ExperimentConfig`, returns a
:class:`ConvergenceReport` whose ``fail`` rows mark violated checks, and
may write extra plot-ready artifacts next to the report.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict

import numpy as np

from . import chaos, current, hermite, norms
from .config import CRITERIA, ExperimentConfig, defaults_for
from .report import ConvergenceReport, ReportRow, clean_json, write_csv
from .rng import replica_rng, summarize
from .sheet import (
    GridSpec,
    node_covariance,
    read_path_csv,
    run_batches,
    simulate_sheet,
    write_path_csv,
)

__all__ = ["EXPERIMENTS", "run", "run_all"]

N_SE = 3.0
BATCH_HEADER = ["x", "n", "m", "replicas", "mc_mean", "mc_stderr", "exact", "abs_diff"]


def _out(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _within(est, reference: float) -> bool:
    return abs(est.mean.real - reference) <= N_SE * est.std_error


def simulate(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("simulate", seed=cfg.seed)
    n = cfg.grid_sizes[0]
    path = simulate_sheet(GridSpec.uniform(n), cfg.d[0], cfg.seed)
    dest = write_path_csv(path, _out(cfg) / "simulate_path.csv")
    back = read_path_csv(dest, cfg.seed)
    axes = max(np.max(np.abs(path.values[:, 0, :])), np.max(np.abs(path.values[:, :, 0])))
    rep.check(axes == 0.0, "axis values vanish", n, exact=float(axes), target=0.0)
    rep.check(np.array_equal(back.values, path.values), "csv round trip bit-exact", n)
    rep.payload = {"path_csv": dest.name, "d": cfg.d[0], "grid": n}
    return rep


def qv(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("qv", seed=cfg.seed)
    for n in cfg.grid_sizes:
        grid = GridSpec.uniform(n, 1)
        samples = run_batches(
            grid, 1, cfg.seed, cfg.replicas, lambda v: np.sum(np.diff(v[:, 0, :, 1], axis=-1) ** 2, axis=-1), cfg.threads
        )
        est = summarize(samples, cfg.seed, 1.0)
        rep.check(_within(est, 1.0), "quadratic variation t=1", n, 1.0, est.mean.real, est.std_error, 1.0)

    grid = GridSpec.uniform(8)
    pairs = [((8, 8), (8, 8)), ((4, 4), (4, 4)), ((2, 6), (6, 2)), ((3, 5), (8, 8)), ((1, 1), (7, 3)), ((5, 2), (5, 7))]

    def products(v):
        w = v[:, 0]
        return np.stack([w[:, a[0], a[1]] * w[:, b[0], b[1]] for a, b in pairs], axis=1)

    samples = run_batches(grid, 1, cfg.seed, cfg.replicas, products, cfg.threads)
    for k, (a, b) in enumerate(pairs):
        target = node_covariance(grid, a, b)
        est = summarize(samples[:, k], cfg.seed, target)
        rep.check(_within(est, target), f"covariance {a}-{b}", 8, target, est.mean.real, est.std_error, target)

    def fourier_stat(v):
        return current.fourier_current_batch(v[:, 0], 0.7)

    small = GridSpec.uniform(16)
    runs = [run_batches(small, 1, cfg.seed, 1000, fourier_stat, threads) for threads in (1, 4, 8)]
    same = all(r.tobytes() == runs[0].tobytes() for r in runs[1:])
    rep.check(same, "bit-identical for threads 1/4/8", 16)
    return rep


def watanabe_norm(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("watanabe-norm", seed=cfg.seed)
    series = []
    longer = 10 * cfg.m_max
    for alpha in cfg.alpha:
        params = norms.SeriesParams(alpha, cfg.m_max, cfg.quad_order, cfg.weight_convention)
        if alpha < -0.5:
            for x in cfg.x_values:
                res = norms.watanabe_norm_xi(x, params)
                far = norms.watanabe_norm_xi(x, norms.SeriesParams(alpha, longer, cfg.quad_order, cfg.weight_convention))
                series.append(res.to_dict() | {"x": x})
                step = far.partial_sum - res.partial_sum
                ok = res.converged and res.accurate and -cfg.tolerance <= step <= res.tail_bound
                rep.check(ok, f"x={x} alpha={alpha} stable within tail", res.m_max, res.partial_sum, far.partial_sum)
        else:
            res = norms.watanabe_norm_xi(cfg.x_values[0], params)
            series.append(res.to_dict() | {"x": cfg.x_values[0]})
            rep.check(not res.converged, f"x={cfg.x_values[0]} alpha={alpha} non-convergent", cfg.m_max, res.partial_sum)
            bound = norms.bounding_series(alpha, longer, cfg.weight_convention)
            growth = bound[longer] / bound[cfg.m_max] - 1.0
            rep.check(growth > 0.1, f"alpha={alpha} bound series growth {cfg.m_max}->{longer}", longer, growth, target=0.1)
    ratio = float(hermite.stirling_ratio(10_000))
    rep.check(abs(ratio / hermite.STIRLING_LIMIT - 1.0) < 0.01, "m! c_m^2 sqrt(m) at m=1e4", 10_000, ratio, target=hermite.STIRLING_LIMIT)
    (_out(cfg) / "watanabe-norm_series.json").write_text(json.dumps(clean_json(series), indent=2) + "\n")
    rep.payload = {"series_json": "watanabe-norm_series.json"}
    return rep


def approx_error_norm(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("approx-error-norm", seed=cfg.seed)
    rows = []
    alpha = cfg.alpha[0]
    params = norms.SeriesParams(alpha, cfg.m_max, cfg.quad_order, cfg.weight_convention)
    for x in cfg.x_values:
        prev = None
        for n in sorted(cfg.grid_sizes):
            res = norms.approximation_error_norm(x, GridSpec.uniform(n), params)
            ok = res.accurate and min(v for _, v in res.per_term) >= -10 * cfg.tolerance
            if prev is not None:
                ok = ok and prev.partial_sum - res.partial_sum > max(cfg.tolerance, prev.quad_error + res.quad_error)
            rep.check(ok, f"x={x} error norm decreasing", n, res.partial_sum, target=0.0)
            checks = [
                norms.BoundCheck(m, s1, s2, s3, norms.level_bound(m)) for m, s1, s2, s3 in res.breakdown[1:]
            ]
            rep.check(all(checks), f"x={x} per-level bounds m<={cfg.m_max}", n,
                      max(max(c.s1, abs(c.s2), c.s3) / c.bound for c in checks) if checks else 0.0, target=1.0)
            rows.append([x, n, n, res.partial_sum, res.tail_bound, res.quad_error])
            prev = res
    write_csv(_out(cfg) / "approx-error-norm_values.csv", ["x", "n", "m", "partial_sum", "tail_bound", "quad_error"], rows)
    return rep


def _fourier_batch_row(x, n, est, exact):
    return [x, n, n, est.replicas, est.mean.real, est.std_error, exact, abs(est.mean.real - exact)]


def fourier_moment(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("fourier-moment", seed=cfg.seed)
    xs = list(cfg.x_values)
    batch = []
    prev_gap = None
    for n in sorted(cfg.grid_sizes):
        grid = GridSpec.uniform(n)
        exact = current.fourier_second_moment_exact(grid)
        closed = ((n - 1) / (2 * n)) ** 2
        gap = 0.25 - exact
        ok = abs(exact - closed) <= 4 * math.ulp(closed) and abs(gap - (2 * n - 1) / (4 * n * n)) <= 1e-15
        if prev_gap is not None:
            ok = ok and 0 < gap < prev_gap
        prev_gap = gap
        if n > cfg.mc_size_limit:
            rep.check(ok, "exact grid moment", n, exact, target=0.25)
            continue

        def stat(v):
            return np.stack([np.abs(current.fourier_current_batch(v[:, 0], x)) ** 2 for x in xs], axis=1)

        samples = run_batches(grid, 1, cfg.seed, cfg.replicas, stat, cfg.threads)
        for k, x in enumerate(xs):
            est = summarize(samples[:, k], cfg.seed, exact)
            rep.check(ok and _within(est, exact), f"x={x} second moment", n, exact, est.mean.real, est.std_error, 0.25)
            batch.append(_fourier_batch_row(x, n, est, exact))
    write_csv(_out(cfg) / "fourier-moment_batch.csv", BATCH_HEADER, batch)
    return rep


def approx_error_fourier(cfg: ExperimentConfig, check_x: float = 1.0, check_n: int = 16, factor: int = 4) -> ConvergenceReport:
    rep = ConvergenceReport("approx-error-fourier", seed=cfg.seed)
    sizes = sorted(cfg.grid_sizes)
    for x in cfg.x_values:
        prev = None
        for n in sizes:
            res = current.approx_error_fourier_exact(GridSpec.uniform(n), x, tol=cfg.tolerance)
            ok = res.accurate and (prev is None or res.value < prev)
            if x == 0.0:
                ok = ok and abs(res.raw - (0.25 - ((n - 1) / (2 * n)) ** 2)) <= 1e-15
            if n == sizes[-1] and n >= 128:
                ok = ok and res.value < 1e-2
            rep.check(ok, f"x={x} fourier error", n, res.value, target=0.0)
            prev = res.value
    coarse, fine = GridSpec.uniform(check_n), GridSpec.uniform(check_n * factor)
    exact = current.fourier_difference_moment_exact(coarse, fine, check_x)
    samples = run_batches(
        fine, 1, cfg.seed, cfg.replicas,
        lambda v: np.abs(current.fourier_difference_batch(v[:, 0], factor, check_x)) ** 2, cfg.threads,
    )
    est = summarize(samples, cfg.seed, exact)
    rep.check(_within(est, exact), f"x={check_x} E|T_N - T_{factor}N|^2", check_n, exact, est.mean.real, est.std_error)
    write_csv(_out(cfg) / "approx-error-fourier_batch.csv", BATCH_HEADER, [_fourier_batch_row(check_x, check_n, est, exact)])
    return rep


def multi_current(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("multi-current", seed=cfg.seed)
    d = cfg.d[0]
    if d < 2:
        raise ValueError("multi-current needs d >= 2")
    xs = [np.full(d, x) for x in cfg.x_values]
    pairs = [(i, j) for i in range(1, d + 1) for j in range(1, d + 1)]
    for n in cfg.grid_sizes:
        grid = GridSpec.uniform(n)
        exact = current.fourier_second_moment_exact(grid)

        def stat(v):
            return np.concatenate(
                [(np.abs(current.multi_fourier_batch_all(v, x)) ** 2).reshape(v.shape[0], -1) for x in xs], axis=1
            )

        samples = run_batches(grid, d, cfg.seed, cfg.replicas, stat, cfg.threads)
        batch = []
        for k, (x, (i, j)) in enumerate(itertools.product(cfg.x_values, pairs)):
            est = summarize(samples[:, k], cfg.seed, exact)
            rep.check(_within(est, exact), f"x={x} entry ({i},{j})", n, exact, est.mean.real, est.std_error, 0.25)
            batch.append(_fourier_batch_row(x, n, est, exact))
        write_csv(_out(cfg) / f"multi-current_batch_{n}.csv", BATCH_HEADER, batch)
    return rep


def sobolev(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("sobolev", seed=cfg.seed)
    if cfg.r:
        cases = [(r, d) for d in cfg.d for r in cfg.r]
    else:
        cases = [(d / 2 + off, d) for d in cfg.d for off in (-0.1, 0.1)] + [(1.0, 1)]
    scans = []
    for r, d in cases:
        scan = current.sobolev_norm_scan(r, d, cfg.cutoffs)
        scans.append(scan.to_dict())
        expected = current.Verdict.FINITE if r > d / 2 else current.Verdict.DIVERGENT
        rep.check(scan.verdict is expected, f"d={d} r={r} {scan.verdict.value}", d, scan.integral_value)
        if d == 1 and r == 1.0:
            rep.check(abs(scan.limit - math.pi / 4) < 1e-4, "d=1 r=1 limit", d, scan.limit, target=math.pi / 4)
    (_out(cfg) / "sobolev_scans.json").write_text(json.dumps(clean_json(scans), indent=2) + "\n")
    return rep


def hermite_checks(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("hermite-checks", seed=cfg.seed)
    target = 1.0 / math.sqrt(math.pi)
    for n in range(7):
        for y in cfg.y_values:
            res = hermite.hermite_gaussian_identity_residual(n, y, 1e-10)
            if res.lhs == 0.0:
                rep.check(abs(res.rhs) <= cfg.tolerance, f"identity n={n} y={y} (zero)", n, res.rhs, target=0.0)
            else:
                rep.check(abs(res.ratio - target) <= cfg.tolerance, f"identity n={n} y={y}", n, res.ratio, target=target)
    lattice = np.linspace(-50.0, 50.0, 4001)
    margin = hermite.bound_margin(cfg.n_max, lattice)
    rep.check(bool(np.all(margin <= 1.0 + 1e-12)), f"|H_n e^(-y^2/2)| <= c_n, n<={cfg.n_max}, |y|<=50",
              cfg.n_max, float(np.max(margin)), target=1.0)
    return rep


def delta_mc(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("delta-mc", seed=cfg.seed)
    w = run_batches(GridSpec.uniform(1), 1, cfg.seed, cfg.replicas, lambda v: v[:, 0, 1, 1], cfg.threads)
    batch = []
    for x in cfg.x_values:
        values = chaos.truncated_delta(x, 1.0, 1.0, w, cfg.m_max)
        density = float(hermite.gaussian_kernel(1.0, x))
        est = summarize(values, cfg.seed, density)
        rep.check(_within(est, density), f"x={x} E[delta_M(x - W)]", cfg.m_max, density, est.mean.real, est.std_error, density)
        moment = summarize(values * w, cfg.seed, x * density)
        rep.check(_within(moment, x * density), f"x={x} E[delta_M(x - W) W]", cfg.m_max, x * density,
                  moment.mean.real, moment.std_error, x * density)
        batch += [_fourier_batch_row(x, 1, est, density), _fourier_batch_row(x, 1, moment, x * density)]
    write_csv(_out(cfg) / "delta-mc_batch.csv", BATCH_HEADER, batch)
    return rep


def lemma_fourier(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("lemma-fourier", seed=cfg.seed)
    for (u, v), x, m in itertools.product(((1.0, 1.0), (0.5, 0.5)), cfg.x_values, range(cfg.m_max + 1)):
        quad = chaos.delta_coeff_fourier_quadrature(m, u, v, x)
        closed = chaos.delta_coeff_fourier(m, u * v, x)
        diff = abs(quad - closed)
        rep.check(diff <= cfg.tolerance, f"m={m} x={x} u=v={u}", m, diff, target=0.0)
    return rep


def _random_partially_symmetric(rng, m: int, size: int) -> np.ndarray:
    raw = rng.integers(-9, 10, size=(size,) * (m + 2))
    table = np.array([Fraction(int(v)) for v in raw.ravel()], dtype=object).reshape(raw.shape)
    if m < 2:
        return table
    total = None
    perms = list(itertools.permutations(range(m)))
    for perm in perms:
        term = np.transpose(table, list(perm) + [m, m + 1])
        total = term if total is None else total + term
    return total / len(perms)


def symmetrization(cfg: ExperimentConfig) -> ConvergenceReport:
    rep = ConvergenceReport("symmetrization", seed=cfg.seed)
    case = 0
    for m in range(4):
        for size in cfg.grid_sizes:
            table = _random_partially_symmetric(replica_rng(cfg.seed, case), m, size)
            case += 1
            same = np.array_equal(chaos.symmetrize_partial(table, m), chaos.permutation_average(table))
            rep.check(same, f"m+2={m + 2} points, domain {size}", size)
    return rep


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], ConvergenceReport]] = {
    "simulate": simulate,
    "qv": qv,
    "watanabe-norm": watanabe_norm,
    "approx-error-norm": approx_error_norm,
    "fourier-moment": fourier_moment,
    "approx-error-fourier": approx_error_fourier,
    "multi-current": multi_current,
    "sobolev": sobolev,
    "hermite-checks": hermite_checks,
    "delta-mc": delta_mc,
    "lemma-fourier": lemma_fourier,
    "symmetrization": symmetrization,
}


def run(cfg: ExperimentConfig) -> ConvergenceReport:
    """Run one experiment, time it and write its report into ``cfg.out``."""
    start = time.perf_counter()
    rep = EXPERIMENTS[cfg.subcommand](cfg)
    rep.wall_time = time.perf_counter() - start
    rep.write(cfg.out)
    return rep


def run_all(sections: Dict[str, Dict], overrides: Dict) -> ConvergenceReport:
    """Every experiment under its own defaults; one summary row per experiment."""
    start = time.perf_counter()
    shared = dict(sections.get("shared", {}))
    shared.update(overrides)
    summary = ConvergenceReport("report", seed=int(shared.get("seed", 0)))
    for name in EXPERIMENTS:
        cfg = defaults_for(name, shared, sections.get(name))
        rep = run(cfg)
        summary.add(ReportRow(
            f"criterion {CRITERIA[name]}: {name}", None, float(len(rep.rows) - len(rep.failures)),
            target=float(len(rep.rows)), status="pass" if rep.passed else "fail",
        ))
        summary.payload[name] = {"passed": rep.passed, "failures": rep.failures}
    summary.wall_time = time.perf_counter() - start
    summary.write(defaults_for("report", shared, sections.get("report")).out)
    return summary
