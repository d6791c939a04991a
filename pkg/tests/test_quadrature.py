from __future__ import annotations

import math

import numpy as np
import pytest

from pinchsop.quadrature import cell_integrals, clustered_grid, endpoint_rule, integrate, \
    integrate_piecewise


def test_endpoint_rule_handles_inverse_sqrt():
    assert integrate(lambda x: 1 / np.sqrt(x), 0.0, 4.0) == pytest.approx(4.0, rel=1e-12)
    assert integrate(lambda x: 1 / np.sqrt(1 - x), 0.0, 1.0) == pytest.approx(2.0, rel=1e-12)


def test_endpoint_rule_nodes_inside():
    x, w = endpoint_rule(-1.0, 3.0, 10)
    assert np.all((x > -1) & (x < 3))
    assert w.sum() == pytest.approx(4.0)


def test_integrate_piecewise_kink():
    f = lambda x: np.abs(x - 0.3)  # noqa: E731
    assert integrate_piecewise(f, [0.0, 0.3, 1.0]) == pytest.approx(0.045 + 0.245, abs=1e-14)


def test_clustered_grid_contains_knots():
    g = clustered_grid([0.0, 1.0, 5.0], 100)
    assert 1.0 in g and g[0] == 0.0 and g[-1] == 5.0
    assert np.all(np.diff(g) > 0)


def test_cell_integrals_sum():
    edges = np.linspace(0, math.pi, 65)
    cells = cell_integrals(np.sin, edges)
    assert cells.shape == (64,)
    assert cells.sum() == pytest.approx(2.0, abs=1e-13)
