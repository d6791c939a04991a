from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracle_values as ov
from pinchsop import (CopulaModel, DomainError, InsufficientDataError, SystemGeometry,
                      conditional_cdf, estimate_rho, mc_pairs, sample_copula, std_normal_cdf,
                      std_normal_quantile)
from pinchsop.quadrature import gauss_legendre


def test_cdf_at_zero():
    assert std_normal_cdf(0.0) == 0.5


def test_cdf_table_value():
    assert std_normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)


def test_cdf_symmetry():
    z = np.linspace(-8, 8, 1601)
    assert np.max(np.abs(std_normal_cdf(z) + std_normal_cdf(-z) - 1)) <= 1e-14


def test_cdf_deep_tail_keeps_precision():
    # erfc keeps relative accuracy where 1 - Phi(-z) would cancel
    assert std_normal_cdf(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_quantile_at_half():
    assert std_normal_quantile(0.5) == 0.0


def test_quantile_table_value():
    assert std_normal_quantile(0.975) == pytest.approx(ov.QUANTILE_0975, abs=1e-12)
    assert std_normal_quantile(0.975) == pytest.approx(1.959963985, abs=1e-7)


def test_quantile_round_trip():
    z = np.linspace(-6, 6, 2401)
    assert np.max(np.abs(std_normal_quantile(std_normal_cdf(z)) - z)) <= 1e-8


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_rejects_outside(p):
    with pytest.raises(DomainError):
        std_normal_quantile(p)


@given(st.floats(1e-300, 1 - 1e-16))
def test_quantile_inverts_cdf(p):
    z = std_normal_quantile(p)
    assert std_normal_cdf(z) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.2, float("nan")])
def test_model_rejects_rho(rho):
    with pytest.raises(DomainError):
        CopulaModel(rho)


def test_conditional_independent_returns_u():
    u = np.linspace(0.01, 0.99, 50)
    out = conditional_cdf(CopulaModel(0.0), u, 0.3)
    assert np.max(np.abs(out - u)) <= 1e-12


@pytest.mark.parametrize("rho", [0.0, 0.3, 0.7, 0.95])
@pytest.mark.parametrize("u", [0.05, 0.5, 0.9])
def test_conditional_diagonal(rho, u):
    expected = std_normal_cdf(std_normal_quantile(u) * (1 - rho) / math.sqrt(1 - rho * rho))
    assert conditional_cdf(CopulaModel(rho), u, u) == pytest.approx(expected, abs=1e-14)


def test_conditional_against_bivariate_quadrature():
    assert conditional_cdf(CopulaModel(0.5), 0.9, 0.9) == pytest.approx(
        ov.CONDITIONAL_RHO05_U09_V09, abs=1e-6)


def test_conditional_boundaries_exact():
    m = CopulaModel(0.6)
    assert conditional_cdf(m, 0.0, 0.4) == 0.0
    assert conditional_cdf(m, 1.0, 0.4) == 1.0
    assert 0 < conditional_cdf(m, 1e-300, 0.999999) < 1e-10


def test_conditional_broadcasts():
    out = conditional_cdf(CopulaModel(0.4), np.array([[0.2], [0.8]]), np.array([0.1, 0.5, 0.9]))
    assert out.shape == (2, 3)
    assert np.all(np.diff(out, axis=0) > 0)


@given(u=st.floats(0.0, 1.0), v=st.floats(0.0, 1.0), rho=st.floats(-0.99, 0.99))
def test_conditional_is_probability(u, v, rho):
    assert 0.0 <= conditional_cdf(CopulaModel(rho), u, v) <= 1.0


def test_marginalization_identity():
    # int_0^1 C(u|v) dv = u, integrated in z = Phi^-1(v) to tame the ends
    x, w = gauss_legendre(400)
    z = -9 + 18 * x
    dv = 18 * w * np.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    v = std_normal_cdf(z)
    for u in (0.01, 0.2, 0.5, 0.77, 0.99):
        for rho in (-0.8, 0.0, 0.3, 0.9):
            assert float(np.sum(conditional_cdf(CopulaModel(rho), u, v) * dv)) == pytest.approx(u, abs=1e-6)


def test_rho_comonotone_clamped():
    g = np.random.default_rng(0).uniform(1, 2, 1000)
    assert estimate_rho(np.column_stack([g, g])) == pytest.approx(0.999)
    assert estimate_rho(np.column_stack([g, -g])) == pytest.approx(-0.999)


def test_rho_independent_pairs():
    pairs = np.random.default_rng(1).uniform(size=(10**5, 2))
    assert abs(estimate_rho(pairs)) <= 0.02


def test_rho_recovers_copula_parameter():
    pairs = sample_copula(CopulaModel(0.6), 10**5, seed=2)
    assert estimate_rho(pairs) == pytest.approx(0.6, abs=0.02)


def test_rho_invariant_to_monotone_transforms():
    pairs = sample_copula(CopulaModel(-0.3), 5000, seed=3)
    warped = np.column_stack([np.exp(pairs[:, 0]), 1 / (1 + pairs[:, 1])])
    assert estimate_rho(warped) == pytest.approx(-estimate_rho(pairs), abs=1e-12)


def test_rho_needs_data():
    with pytest.raises(InsufficientDataError):
        estimate_rho(np.ones((99, 2)))
    with pytest.raises(ValueError):
        estimate_rho(np.ones(10))


def test_rho_physical_pairs_small_positive():
    rho = estimate_rho(mc_pairs(SystemGeometry(20, 5, 2.0, 1e3), 10**5, seed=4))
    assert -0.02 <= rho <= 0.02


def test_cdf_of_quantile_round_trip_grid():
    p = np.concatenate([np.geomspace(1e-10, 0.5, 400), 1 - np.geomspace(1e-10, 0.5, 400)])
    assert np.max(np.abs(std_normal_cdf(std_normal_quantile(p)) - p)) <= 1e-9


@pytest.mark.parametrize("rho", [-0.9, 0.0, 0.5, 0.99])
@pytest.mark.parametrize("v", [1e-6, 0.3, 0.999])
def test_conditional_monotone_in_u(rho, v):
    u = np.linspace(0.0, 1.0, 2001)
    assert np.all(np.diff(conditional_cdf(CopulaModel(rho), u, v)) >= 0)
