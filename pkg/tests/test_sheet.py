import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheetcurrent.errors import InvalidGridError
from sheetcurrent.rng import summarize
from sheetcurrent.sheet import (
    MAX_COMPONENTS,
    GridSpec,
    corner_increments,
    horizontal_increment,
    node_covariance,
    quadratic_variation_row,
    read_path_csv,
    run_batches,
    simulate_batch,
    simulate_sheet,
    vertical_increment,
    write_path_csv,
)


@st.composite
def grids(draw, max_cells=6):
    def nodes():
        inner = draw(st.lists(st.floats(0.01, 0.99), max_size=max_cells - 1, unique=True))
        return [0.0] + sorted(inner) + [1.0]

    s, t = nodes(), nodes()
    if any(b - a < 1e-6 for a, b in zip(s, s[1:])) or any(b - a < 1e-6 for a, b in zip(t, t[1:])):
        return GridSpec.uniform(len(s) - 1, len(t) - 1)
    return GridSpec(s, t)


@pytest.mark.parametrize(
    "s",
    [[0.0], [0.1, 1.0], [0.0, 0.9], [0.0, 0.5, 0.5, 1.0], [0.0, 0.7, 0.3, 1.0], [0.0, float("nan"), 1.0]],
)
def test_invalid_grids_rejected(s):
    with pytest.raises(InvalidGridError):
        GridSpec(s, [0.0, 1.0])


def test_uniform_grid_and_refine():
    g = GridSpec.uniform(4, 2)
    assert (g.n_s, g.n_t) == (4, 2)
    assert np.allclose(g.ds, 0.25) and np.allclose(g.dt, 0.5)
    assert g.refine(2) == GridSpec.uniform(8, 4)
    with pytest.raises(InvalidGridError):
        GridSpec.uniform(0)


def test_grid_nodes_are_read_only():
    g = GridSpec.uniform(3)
    with pytest.raises(ValueError):
        g.s_nodes[1] = 0.5


def test_n1_path_is_zero_except_corner():
    p = simulate_sheet(GridSpec.uniform(1), seed=5)
    assert p.values.shape == (1, 2, 2)
    assert p.values[0, 0, 0] == p.values[0, 1, 0] == p.values[0, 0, 1] == 0.0


@given(grids(), st.integers(1, 3), st.integers(0, 2**63))
def test_axes_vanish_and_seed_reproduces(grid, d, seed):
    p = simulate_sheet(grid, d, seed)
    assert p.values.shape == (d, grid.n_s + 1, grid.n_t + 1)
    assert np.all(p.values[:, 0, :] == 0.0) and np.all(p.values[:, :, 0] == 0.0)
    assert simulate_sheet(grid, d, seed).values.tobytes() == p.values.tobytes()


def test_batch_matches_single_paths_bitwise():
    g = GridSpec.uniform(5, 3)
    batch = simulate_batch(g, 2, 42, 10, 14)
    for k, r in enumerate(range(10, 14)):
        assert batch[k].tobytes() == simulate_sheet(g, 2, 42, r).values.tobytes()


def test_component_cap():
    with pytest.raises(ValueError):
        simulate_sheet(GridSpec.uniform(2), MAX_COMPONENTS + 1)
    with pytest.raises(ValueError):
        simulate_sheet(GridSpec.uniform(2), 0)


def test_increments_and_index_errors():
    p = simulate_sheet(GridSpec.uniform(3), seed=1)
    w = p.values[0]
    assert horizontal_increment(p, 1, 2) == w[2, 2] - w[1, 2]
    assert vertical_increment(p, 2, 1) == w[2, 2] - w[2, 1]
    assert horizontal_increment(p, 0, 0) == 0.0
    with pytest.raises(IndexError):
        horizontal_increment(p, 3, 0)
    with pytest.raises(IndexError):
        vertical_increment(p, 0, 3)
    with pytest.raises(IndexError):
        quadratic_variation_row(p, 1, 0)


def test_corner_increments_shapes():
    p = simulate_sheet(GridSpec.uniform(4, 3), seed=2)
    corner, horiz, vert = corner_increments(p.values[0])
    assert corner.shape == horiz.shape == vert.shape == (4, 3)
    assert horiz[1, 2] == horizontal_increment(p, 1, 2)


def test_path_is_read_only():
    p = simulate_sheet(GridSpec.uniform(2), seed=0)
    with pytest.raises(ValueError):
        p.values[0, 1, 1] = 3.0


def test_csv_round_trip(tmp_path):
    p = simulate_sheet(GridSpec([0, 0.3, 1], [0, 0.5, 0.75, 1]), 2, seed=8)
    dest = write_path_csv(p, tmp_path / "p.csv")
    assert dest.read_text().splitlines()[0] == "component,i,j,s,t,value"
    back = read_path_csv(dest)
    assert back.grid == p.grid
    assert back.values.tobytes() == p.values.tobytes()


def test_node_covariance_monte_carlo():
    g = GridSpec([0, 0.2, 0.5, 1], [0, 0.4, 1])
    pairs = [((3, 2), (3, 2)), ((1, 2), (3, 1)), ((2, 1), (2, 2)), ((1, 1), (3, 2))]

    def stat(v):
        w = v[:, 0]
        return np.stack([w[:, a[0], a[1]] * w[:, b[0], b[1]] for a, b in pairs], axis=1)

    samples = run_batches(g, 1, 123, 20_000, stat)
    for k, (a, b) in enumerate(pairs):
        est = summarize(samples[:, k], 123, node_covariance(g, a, b))
        assert est.within(3.0), (a, b, est)


def test_components_are_independent():
    g = GridSpec.uniform(2)
    samples = run_batches(g, 2, 7, 20_000, lambda v: v[:, 0, 2, 2] * v[:, 1, 2, 2])
    assert summarize(samples, 7, 0.0).within(3.0)


@pytest.mark.parametrize("n,t", [(50, 1.0), (400, 0.5)])
def test_quadratic_variation_mean_and_spread(n, t):
    g = GridSpec(np.linspace(0, 1, n + 1), [0.0, t, 1.0] if t < 1 else [0.0, 1.0])
    samples = run_batches(g, 1, 3, 4000, lambda v: np.sum(np.diff(v[:, 0, :, 1], axis=-1) ** 2, axis=-1))
    est = summarize(samples, 3, t)
    assert est.within(3.0)
    # Var = 2 t^2 sum ds^2 = 2 t^2 / n
    assert np.isclose(np.var(samples, ddof=1), 2 * t * t / n, rtol=0.1)


def test_quadratic_variation_row_matches_sum():
    p = simulate_sheet(GridSpec.uniform(6, 2), seed=4)
    assert quadratic_variation_row(p, 0, 2) == pytest.approx(float(np.sum(np.diff(p.values[0, :, 2]) ** 2)))


def test_results_identical_for_any_thread_count():
    g = GridSpec.uniform(8)
    runs = [run_batches(g, 1, 99, 700, lambda v: v[:, 0, 5, 7] ** 3, threads) for threads in (1, 4, 8)]
    assert runs[0].tobytes() == runs[1].tobytes() == runs[2].tobytes()
