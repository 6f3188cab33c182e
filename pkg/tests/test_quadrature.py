import math

import numpy as np
import pytest

from sheetcurrent.quadrature import cell_rule, composite_rule, gauss_legendre, quad_2d


def test_rule_integrates_polynomials_exactly():
    x, w = gauss_legendre(5)
    for k in range(10):
        assert np.dot(w, x**k) == pytest.approx(1 / (k + 1), rel=1e-14)


def test_composite_and_cell_rules_agree():
    edges = np.array([0.0, 0.2, 0.7, 1.0])
    x, w = composite_rule(edges, 6)
    cx, cw = cell_rule(edges[:-1], edges[1:], 6)
    assert np.array_equal(x, cx.ravel()) and np.array_equal(w, cw.ravel())
    assert np.dot(w, np.exp(x)) == pytest.approx(math.e - 1, rel=1e-14)


def test_quad_2d_examples():
    assert quad_2d(lambda u, v: np.ones_like(u)).value == 1.0
    assert quad_2d(lambda u, v: u * v, order=2).value == pytest.approx(0.25, rel=1e-15)
    res = quad_2d(lambda u, v: np.sqrt(u * v), order=64, tol=1e-5)
    assert abs(res.value - 4 / 9) < 1e-6
    assert res.accurate


def test_quad_2d_region_and_flag():
    res = quad_2d(lambda u, v: u + v, region=((1, 2), (0, 3)), order=4)
    assert res.value == pytest.approx(3 * 1.5 + 1 * 4.5)
    rough = quad_2d(lambda u, v: np.abs(np.sin(40 * u)) * v, order=4, tol=1e-12)
    assert not rough.accurate and rough.error_estimate > 0
    with pytest.raises(ValueError):
        quad_2d(lambda u, v: u, order=1)
