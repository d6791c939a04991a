from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle_values as ov
from pinchsop import (ConvergenceError, CopulaModel, DomainError, SopRequest, SystemGeometry,
                      chebyshev_nodes, estimate_rho, mc_pairs, sample_copula, snr_marginals,
                      sop_adaptive_reference, sop_chebyshev, sop_independence, wiretap_threshold)
from pinchsop.marginals import Branch, PiecewisePdf, SnrMarginals
from pinchsop.sop import _integrand, evaluate


def flat(lo, hi):
    return PiecewisePdf([Branch(lo, hi, lambda x: np.full_like(x, 1 / (hi - lo)), "flat")])


def geom_db(db, delta=1.0):
    return SystemGeometry(20.0, 5.0, delta, 10 ** (db / 10))


# --- threshold and nodes ------------------------------------------------------

def test_threshold_values():
    assert wiretap_threshold(0.0, 0.0) == 0.0
    assert wiretap_threshold(1.0, 0.5) == pytest.approx(2 * math.sqrt(2) - 1, abs=1e-12)
    g = np.array([0.1, 3.0, 250.0])
    assert np.allclose(wiretap_threshold(g, 0.0), g, rtol=1e-15, atol=0)


def test_threshold_rejects_negative_rate():
    with pytest.raises(DomainError):
        wiretap_threshold(1.0, -0.1)


def test_nodes_small():
    assert chebyshev_nodes(1) == pytest.approx([0.0], abs=1e-16)
    assert chebyshev_nodes(2) == pytest.approx([math.sqrt(2) / 2, -math.sqrt(2) / 2], abs=1e-15)


def test_nodes_symmetric():
    xi = chebyshev_nodes(200)
    assert xi.size == 200
    assert np.max(np.abs(xi + xi[::-1])) <= 1e-15


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_nodes_reject(bad):
    with pytest.raises(DomainError):
        chebyshev_nodes(bad)


@pytest.mark.parametrize("kw", [dict(rate_threshold_rth=-1.0), dict(node_count_N=0),
                                dict(rho=1.0), dict(method="simpson")])
def test_request_validation(kw, geom_iv):
    args = dict(geometry=geom_iv, rate_threshold_rth=0.5)
    args.update(kw)
    with pytest.raises(DomainError):
        SopRequest(**args)


# --- support-decided cases -------------------------------------------------------

@pytest.mark.parametrize("fn", [sop_chebyshev, sop_adaptive_reference, sop_independence])
def test_certain_outage(fn, geom_iv):
    req = SopRequest(geom_iv, 8.0, 0.4)
    assert wiretap_threshold(geom_iv.gamma_e_min, 8.0) > geom_iv.gamma_b_max
    res = fn(req)
    assert res.probability == pytest.approx(1.0, abs=1e-9)
    assert "certain-outage" in res.diagnostics


@pytest.mark.parametrize("fn", [sop_chebyshev, sop_adaptive_reference, sop_independence])
def test_dominated_eve_never_outage(fn):
    marg = SnrMarginals.from_pdfs(flat(2.0, 3.0), flat(0.5, 1.0))
    assert fn(SopRequest(None, 0.0, 0.0), marg).probability == 0.0


# --- synthetic marginals with known answers --------------------------------------

@pytest.mark.parametrize("rho", [0.0, 0.5, -0.7])
def test_exchangeable_uniforms_half(rho):
    # P(U_B < U_E) = 1/2 for exchangeable copula pairs
    marg = SnrMarginals.from_pdfs(flat(0.0, 1.0), flat(0.0, 1.0))
    req = SopRequest(None, 0.0, rho)
    assert sop_adaptive_reference(req, marg).probability == pytest.approx(0.5, abs=1e-8)
    assert sop_chebyshev(req, marg).probability == pytest.approx(0.5, abs=1e-4)


def test_chebyshev_smooth_integrand_converges_fast():
    marg = SnrMarginals.from_pdfs(flat(0.0, 1.0), flat(0.0, 1.0))
    errs = [abs(sop_chebyshev(SopRequest(None, 0.0, 0.0, N), marg).probability - 0.5)
            for N in (25, 50, 100, 200, 400)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[3] <= 1e-5


# --- physical scenario --------------------------------------------------------

def test_aligned_limit_chebyshev_matches_independence():
    # delta -> 0 and rho = 0: the copula rule should reproduce the independence integral.
    # The N = 200 rule integrates across square-root cusps of Eve's density, so
    # this fails at ~3e-4; see the decisions ledger.
    req = SopRequest(SystemGeometry(20, 5, 2e-5, 10**1.5), 0.5, 0.0, 200)
    assert abs(sop_chebyshev(req).probability - sop_independence(req).probability) <= 1e-6


def test_default_scenario_point_dual_oracle():
    geom = geom_db(30.0)
    rho = estimate_rho(mc_pairs(geom, 10**5, seed=1))
    req = SopRequest(geom, 0.5, rho, 200)
    cheb = sop_chebyshev(req).probability
    ref = sop_adaptive_reference(req)
    assert ref.error_estimate <= 1e-8
    assert abs(cheb - ref.probability) <= 1e-4
    p_mc, se = ov.MC_PINCHING_30DB_R05
    assert abs(cheb - p_mc) <= 3 * se + 0.05


@pytest.mark.parametrize("db,key", [(15.0, "MC_INDEPENDENT_15DB_R05"), (30.0, "MC_INDEPENDENT_30DB_R05")])
def test_independence_matches_forced_independent_mc(db, key):
    p_mc, se = getattr(ov, key)
    p = sop_independence(SopRequest(geom_db(db), 0.5)).probability
    assert abs(p - p_mc) <= 3 * se


@pytest.mark.parametrize("db", [12.0, 20.0, 35.0])
def test_adaptive_rho_zero_is_independence(db):
    req = SopRequest(geom_db(db), 0.5, 0.0)
    assert sop_adaptive_reference(req).probability == pytest.approx(
        sop_independence(req).probability, abs=1e-8)


def test_integrand_continuous_at_branch_boundaries(geom_iv):
    # Eve's density has square-root cusps at some knots, so one-sided gaps
    # shrink like sqrt(eps) instead of linearly; they must still vanish
    marg = snr_marginals(geom_iv)
    f = _integrand(marg, 0.5, CopulaModel(0.3))
    lo, hi = marg.eve_support
    for k in marg.eve_knots:
        if not lo < k < hi:
            continue
        mid = float(f(k))
        assert np.isfinite(mid)
        gaps = []
        for rel in (1e-6, 1e-9, 1e-12):
            side = f(np.array([k * (1 - rel), k * (1 + rel)]))
            assert np.isfinite(side).all()
            gaps.append(float(np.max(np.abs(side - mid))))
        assert gaps[-1] <= 1e-5 * max(abs(mid), 1.0)
        assert gaps[-1] <= gaps[0] + 1e-12


def test_convergence_error_carries_estimate(geom_iv):
    req = SopRequest(geom_iv, 0.5, 0.3)
    with pytest.raises(ConvergenceError) as info:
        sop_adaptive_reference(req, tol=1e-18)
    assert 0.5 < info.value.best_estimate < 0.9
    assert info.value.error_bound > 1e-18


def test_evaluate_dispatch(geom_iv):
    for method in ("chebyshev", "adaptive-reference", "independence"):
        res = evaluate(SopRequest(geom_iv, 0.5, 0.2, 64, method))
        assert res.method == method


@settings(max_examples=25, deadline=None)
@given(rth=st.floats(0.0, 6.0), rho=st.floats(-0.95, 0.95), n=st.integers(1, 300))
def test_probability_in_unit_interval(rth, rho, n):
    res = sop_chebyshev(SopRequest(geom_db(18.0), rth, rho, n))
    assert 0.0 <= res.probability <= 1.0


# --- trends ---------------------------------------------------------------

def test_sop_non_increasing_in_snr():
    vals = [sop_adaptive_reference(SopRequest(geom_db(db), 0.5, 0.05)).probability
            for db in range(0, 61, 5)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


def test_sop_non_decreasing_in_rate():
    vals = [sop_chebyshev(SopRequest(geom_db(20.0), r, 0.05)).probability
            for r in np.linspace(0, 3, 13)]
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_sop_non_decreasing_in_rho_at_15_db(delta):
    vals = [sop_chebyshev(SopRequest(geom_db(15.0, delta), 0.5, r)).probability
            for r in np.linspace(0, 0.95, 20)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def _copula_mc(marg, rth, rho, n, seed):
    """Outage frequency for copula-coupled SNRs drawn by inverse transform."""
    uv = sample_copula(CopulaModel(rho), n, seed)

    def inverse(cdf, support):
        g = np.linspace(*support, 20001)
        F = cdf(g)
        F, idx = np.unique(F, return_index=True)
        return lambda u: np.interp(u, F, g[idx])

    g_b = inverse(marg.bob_cdf, marg.bob_support)(uv[:, 0])
    g_e = inverse(marg.eve_cdf, marg.eve_support)(uv[:, 1])
    p = float(np.mean(g_b < wiretap_threshold(g_e, rth)))
    return p, math.sqrt(p * (1 - p) / n)


def test_rho_trend_reverses_at_high_snr():
    # at 30 dB the copula SOP falls with rho; confirmed independently by sampling
    geom = geom_db(30.0)
    marg = snr_marginals(geom)
    for rho in (0.5, 0.9):
        p = sop_adaptive_reference(SopRequest(geom, 0.5, rho)).probability
        p_mc, se = _copula_mc(marg, 0.5, rho, 10**6, seed=int(rho * 10))
        assert abs(p - p_mc) <= 4 * se + 1e-4
    p0 = sop_adaptive_reference(SopRequest(geom, 0.5, 0.0)).probability
    p9 = sop_adaptive_reference(SopRequest(geom, 0.5, 0.9)).probability
    assert p9 < p0 - 0.1
