import numpy as np
import pytest
import statsmodels.api as sm
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from statsmodels.tsa.filters.hp_filter import hpfilter

from newscopula.auxiliary import HP_MONTHLY, hp_filter, ols


def test_hp_matches_statsmodels(rng):
    y = np.cumsum(rng.normal(size=200))
    for lam in (1600.0, HP_MONTHLY):
        trend, cycle = hp_filter(y, lam)
        ref_cycle, ref_trend = hpfilter(y, lam)
        assert np.allclose(trend, ref_trend, atol=1e-8)
        assert np.allclose(cycle, ref_cycle, atol=1e-8)


def test_hp_limits():
    y = np.linspace(-3, 5, 50)
    trend, cycle = hp_filter(y, 0.0)
    assert np.array_equal(trend, y) and np.all(cycle == 0)
    trend, cycle = hp_filter(3.0 + 0.25 * np.arange(40), np.inf)
    assert np.allclose(cycle, 0, atol=1e-12)
    trend, cycle = hp_filter(3.0 + 0.25 * np.arange(40), 1e8)
    assert np.allclose(cycle, 0, atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.integers(8, 80), elements=st.floats(-1e3, 1e3)),
       st.sampled_from([1.0, 1600.0, HP_MONTHLY]))
def test_hp_reconstruction_and_zero_mean_cycle(y, lam):
    trend, cycle = hp_filter(y, lam)
    scale = max(1.0, np.max(np.abs(y)))
    assert np.allclose(trend + cycle, y, atol=1e-12 * scale)
    assert abs(cycle.mean()) < 1e-8 * scale


@pytest.mark.parametrize("period", [12, 24, 48])
def test_hp_cycle_recovers_sine(period):
    t = np.arange(720)
    sine = np.sin(2 * np.pi * t / period)
    _, cycle = hp_filter(5.0 + sine, HP_MONTHLY)
    mid = slice(120, 600)
    amp = np.sqrt(2 * np.mean(cycle[mid] ** 2))
    assert amp == pytest.approx(1.0, abs=0.05)


def test_hp_too_short():
    with pytest.raises(ValueError):
        hp_filter(np.arange(7.0), 10.0)
    with pytest.raises(ValueError):
        hp_filter(np.arange(10.0), -1.0)


def test_ols_exact_fit():
    x = np.arange(1.0, 11.0)
    res = ols(x, x, constant=False)
    assert res.coefficients[0] == pytest.approx(1.0)
    assert res.r_squared == pytest.approx(1.0)


def test_ols_matches_statsmodels_classical_and_hc1(rng):
    X = rng.normal(size=(120, 2))
    y = 0.5 + X @ [1.0, -2.0] + rng.normal(size=120) * (1 + np.abs(X[:, 0]))
    for robust, cov in ((False, "nonrobust"), (True, "HC1")):
        res = ols(y, X, robust=robust)
        ref = sm.OLS(y, sm.add_constant(X)).fit(cov_type=cov)
        assert np.allclose(res.coefficients, ref.params)
        assert np.allclose(res.se, ref.bse)
        assert res.r_squared == pytest.approx(ref.rsquared)
        assert res.names == ("const", "x1", "x2") or list(res.names) == ["const", "x1", "x2"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_ols_residuals_orthogonal(seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(40, 3)) * r.uniform(0.1, 100, 3)
    y = r.normal(size=40) * 50
    res = ols(y, X)
    design = np.column_stack([np.ones(40), X])
    scale = np.abs(design).max() * np.abs(y).max() * 40
    assert np.all(np.abs(design.T @ res.residuals) < 1e-8 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        assert np.allclose(res.t_ratios, res.coefficients / res.se)


def test_ols_rank_deficiency_names_columns(rng):
    x = rng.normal(size=30)
    with pytest.raises(ValueError, match="double"):
        ols(rng.normal(size=30), np.column_stack([x, 2 * x]), names=["x", "double"])


def test_ols_size_under_independence():
    hits = 0
    for i in range(200):
        r = np.random.default_rng([7, i])
        res = ols(r.normal(size=500), r.normal(size=500))
        hits += abs(res.t_ratios[1]) < 1.96
    assert 0.91 <= hits / 200 <= 0.99


def test_ols_slope_recovery():
    covered = 0
    for i in range(100):
        r = np.random.default_rng([8, i])
        x = r.normal(size=200)
        res = ols(2 * x + r.normal(size=200), x)
        covered += abs(res.coefficients[1] - 2) < 3 * res.se[1]
    assert covered >= 97
