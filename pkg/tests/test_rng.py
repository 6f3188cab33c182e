import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheetcurrent.rng import (
    CHUNK_SIZE,
    THREADS_ENV,
    default_threads,
    exact_mean,
    map_replicas,
    replica_rng,
    summarize,
)


def test_replica_stream_depends_only_on_seed_and_index():
    a = replica_rng(11, 5).standard_normal(8)
    b = replica_rng(11, 5).standard_normal(8)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, replica_rng(11, 6).standard_normal(8))
    assert not np.array_equal(a, replica_rng(12, 5).standard_normal(8))


def test_replica_streams_accept_full_64_bit_seeds():
    top = 2**64 - 1
    assert replica_rng(top, 0).standard_normal(2).shape == (2,)
    with pytest.raises(ValueError):
        replica_rng(-1, 0)


@pytest.mark.parametrize("threads", [1, 2, 4, 8])
def test_map_replicas_order_is_thread_independent(threads):
    out = map_replicas(lambda lo, hi: np.arange(lo, hi) ** 2, 1000, threads=threads)
    assert np.array_equal(out, np.arange(1000) ** 2)


def test_map_replicas_rejects_bad_counts():
    with pytest.raises(ValueError):
        map_replicas(lambda lo, hi: np.zeros(hi - lo), 0)
    with pytest.raises(ValueError):
        map_replicas(lambda lo, hi: np.zeros(hi - lo), 5, threads=0)


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "zero")
    with pytest.raises(ValueError):
        default_threads()
    monkeypatch.delenv(THREADS_ENV)
    assert default_threads() >= 1


def test_chunk_size_is_fixed():
    assert CHUNK_SIZE == 256


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_exact_mean_uses_correctly_rounded_sum(values):
    from fractions import Fraction

    exact_sum = float(sum(Fraction(v) for v in values))
    assert exact_mean(np.array(values)) == exact_sum / len(values)


def test_exact_mean_is_order_independent():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(5000) * 10.0 ** rng.integers(-8, 8, 5000)
    assert exact_mean(v) == exact_mean(v[::-1]) == exact_mean(rng.permutation(v))


def test_summarize_real_and_complex():
    res = summarize(np.array([1.0, 2.0, 3.0, 4.0]), seed=9, exact_reference=2.5)
    assert res.mean == 2.5
    assert math.isclose(res.std_error, math.sqrt((5.0 / 3.0) / 4.0))
    assert res.z_score == 0.0 and res.within()
    z = summarize(np.array([1j, -1j]), seed=0)
    assert z.mean == 0
    assert math.isclose(z.std_error, 1.0)
    assert math.isnan(z.z_score)
    with pytest.raises(ValueError):
        summarize(np.array([1.0]), seed=0)


def test_estimator_to_dict_fields():
    d = summarize(np.array([1.0, 3.0]), seed=4, exact_reference=2.0).to_dict()
    assert d["replicas"] == 2 and d["seed"] == 4 and d["mean_im"] == 0.0
