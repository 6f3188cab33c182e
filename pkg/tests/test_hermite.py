import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sheetcurrent.errors import DomainError
from sheetcurrent.hermite import (
    STIRLING_LIMIT,
    bound_constant,
    bound_margin,
    gaussian_kernel,
    gaussian_kernel_d,
    hermite,
    hermite_gaussian_identity_residual,
    hermite_table,
    log_bound_constant,
    orthonormal_hermite,
    scaled_bound,
    stirling_ratio,
    weighted_hermite,
)


def he_over_factorial(n, y):
    # probabilists' polynomial from the physicists' one: He_n(y) = 2^{-n/2} H_n(y / sqrt 2)
    return mpmath.hermite(n, y / mpmath.sqrt(2)) * mpmath.mpf(2) ** (-mpmath.mpf(n) / 2) / mpmath.factorial(n)


@pytest.mark.parametrize("n", range(0, 9))
@pytest.mark.parametrize("y", [-2.5, -1.0, 0.0, 0.3, 1.0, 4.0])
def test_hermite_matches_independent_polynomial(n, y):
    assert hermite(n, y) == pytest.approx(float(he_over_factorial(n, y)), rel=1e-13, abs=1e-15)


def test_low_degree_closed_forms():
    assert hermite(0, 3.0) == 1.0
    assert hermite(1, 0.7) == 0.7
    assert hermite(2, 0.0) == -0.5
    assert hermite(2, 1.0) == 0.0
    assert hermite(3, 2.0) == pytest.approx((8 - 6) / 6)


@given(st.integers(1, 40), st.floats(-8, 8))
def test_recurrence_holds(n, x):
    lhs = (n + 1) * hermite(n + 1, x)
    rhs = x * hermite(n, x) - hermite(n - 1, x)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_table_matches_single_degree():
    x = np.linspace(-3, 3, 7)
    table = hermite_table(6, x)
    for n in range(7):
        assert np.array_equal(table[n], hermite(n, x))


def test_negative_degree_rejected():
    with pytest.raises(DomainError):
        hermite(-1, 0.0)


@pytest.mark.parametrize("m,y", [(50, 3.0), (400, 20.0), (1000, 60.0), (5000, 100.0), (3000, 0.1)])
def test_weighted_hermite_high_degree(m, y):
    mpmath.mp.dps = 60
    exact = he_over_factorial(m, y) * mpmath.sqrt(mpmath.factorial(m)) * mpmath.exp(-mpmath.mpf(y) ** 2 / 2)
    got = None
    for got in weighted_hermite(y, m):
        pass
    assert float(got) == pytest.approx(float(exact), rel=1e-9, abs=1e-300)


def test_weighted_hermite_underflows_to_zero_not_nan():
    values = list(weighted_hermite(np.array([0.0, 50.0, 1e3]), 300))
    assert all(np.all(np.isfinite(v)) for v in values)
    assert values[-1][2] == 0.0


def test_orthonormal_matches_weighted_without_gaussian():
    y = np.array([-1.5, 0.2, 2.0])
    for q, g in zip(orthonormal_hermite(y, 30), weighted_hermite(y, 30)):
        assert np.allclose(q * np.exp(-y * y / 2), g, rtol=1e-12, atol=1e-300)


def test_gaussian_kernel():
    assert gaussian_kernel(1.0, 0.5) == pytest.approx(0.3520653268, abs=1e-10)
    assert gaussian_kernel_d(2.0, [0.1, -0.3]) == pytest.approx(gaussian_kernel(2.0, 0.1) * gaussian_kernel(2.0, -0.3))
    with pytest.raises(DomainError):
        gaussian_kernel(0.0, 1.0)


def test_bound_constant_closed_forms():
    assert bound_constant(0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-14)
    assert bound_constant(1) == pytest.approx(math.sqrt(2) * 2 / math.pi, rel=1e-14)
    assert bound_constant(2) == pytest.approx(2 * (2 / (2 * math.pi)) * math.sqrt(math.pi) / 2, rel=1e-14)
    with pytest.raises(DomainError):
        log_bound_constant(-1)


def test_scaled_bound_large_n_is_finite():
    n = np.array([10.0, 1e4, 1e6, 1e9])
    assert np.all(np.isfinite(scaled_bound(n))) and np.all(scaled_bound(n) > 0)


def test_stirling_ratio_increases_to_limit():
    ratios = stirling_ratio(np.array([1, 10, 100, 1000, 10_000, 100_000]))
    assert np.all(np.diff(ratios) > 0)
    assert np.all(ratios < STIRLING_LIMIT)
    assert abs(ratios[4] / 1.0159 - 1) < 0.01
    assert STIRLING_LIMIT == pytest.approx(1.0159, abs=1e-4)


def test_bound_holds_on_lattice():
    y = np.linspace(-50, 50, 2001)
    assert np.all(bound_margin(200, y) <= 1.0 + 1e-12)


def test_identity_residual_n1_y1_closed_form():
    # int_0^inf u e^{-u^2} sin(a u) du = (a sqrt(pi) / 4) e^{-a^2 / 4}
    a = math.sqrt(2.0)
    integral = a * math.sqrt(math.pi) / 4 * math.exp(-a * a / 4)
    rhs = 2**0.5 * (2 / math.pi) * integral
    res = hermite_gaussian_identity_residual(1, 1.0, 1e-10)
    assert res.rhs == pytest.approx(rhs, abs=1e-10)
    assert res.ratio == pytest.approx(1 / math.sqrt(math.pi), abs=1e-10)


@pytest.mark.parametrize("n", range(7))
@pytest.mark.parametrize("y", [0.5, 1.0, 2.0])
def test_identity_ratio_is_inverse_sqrt_pi(n, y):
    res = hermite_gaussian_identity_residual(n, y, 1e-10)
    if res.lhs == 0.0:
        assert abs(res.rhs) < 1e-10
        assert math.isnan(res.ratio)
    else:
        assert res.ratio == pytest.approx(1 / math.sqrt(math.pi), abs=1e-6)


def test_identity_rejects_bad_arguments():
    with pytest.raises(DomainError):
        hermite_gaussian_identity_residual(-1, 1.0)
    with pytest.raises(ValueError):
        hermite_gaussian_identity_residual(1, 1.0, 0.0)
