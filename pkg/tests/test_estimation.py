import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newscopula import ConvergenceError
from newscopula.copulas import ClaytonCopula, GaussianCopula, make_copula
from newscopula.estimation import (CopulaFit, copula_jackknife, fit_cml, fit_copula, fit_ifm,
                                   jackknife_replicates, jackknife_se,
                                   jackknife_se_from_replicates, pseudo_observations,
                                   rank_copulas, select_family)
from newscopula.marginals import MarginalSpec
from newscopula.simulate import MarginParams, SimulationConfig, make_rng, simulate_system

AR2 = MarginParams(const=0.02, ar=(0.243, 0.279), omega=0.019, persistence=0.497, arch=0.088)
RET = MarginParams(const=0.008, omega=0.0004, persistence=0.76, arch=0.2)
SPEC_X, SPEC_Y = MarginalSpec(), MarginalSpec(ar_lags=(1, 2))


def _clayton_pairs(theta, n, seed):
    return ClaytonCopula(theta).sample(n, make_rng(seed, 9)).T


@pytest.mark.parametrize("family,params", [("gaussian", (0.5,)), ("clayton", (2.0,)),
                                           ("gumbel", (1.8,)), ("t", (0.4, 6.0)),
                                           ("sjc", (0.3, 0.5))])
def test_recovers_parameters(family, params):
    u, v = make_copula(family, *params).sample(3000, make_rng(11, 1)).T
    fit = fit_copula(u, v, family)
    tol = {"gaussian": 0.05, "clayton": 0.2, "gumbel": 0.1, "t": (0.06, 4.0), "sjc": (0.08, 0.08)}
    assert np.allclose(fit.params, params, atol=tol[family])
    assert not fit.boundary


def test_information_criteria_identities():
    u, v = _clayton_pairs(2.0, 300, 1)
    for fam in ("clayton", "t", "sjc"):
        fit = fit_copula(u, v, fam)
        assert fit.aic == 2 * fit.k - 2 * fit.loglik
        assert fit.bic == fit.k * math.log(fit.nobs) - 2 * fit.loglik
        assert fit.loglik == pytest.approx(fit.copula.loglik(u, v), rel=1e-12)
    assert fit_copula(u, v, "t", fixed_df=5.0).k == 1


def test_optimum_beats_random_admissible_probes():
    u, v = _clayton_pairs(1.5, 400, 2)
    r = np.random.default_rng(3)
    probes = {"clayton": lambda: (r.uniform(0, 10),), "gaussian": lambda: (r.uniform(-0.99, 0.99),),
              "gumbel": lambda: (r.uniform(1, 10),),
              "t": lambda: (r.uniform(-0.99, 0.99), r.uniform(2.1, 100)),
              "sjc": lambda: tuple(r.uniform(0.001, 0.99, 2))}
    for fam, draw in probes.items():
        fit = fit_copula(u, v, fam)
        for _ in range(20):
            assert make_copula(fam, *draw()).loglik(u, v) <= fit.loglik + 1e-9


def test_independence_flagged_at_boundary():
    r = np.random.default_rng(4)
    u, v = r.uniform(size=500), 1 - r.uniform(size=500)
    u, v = np.sort(u), np.sort(v)[::-1]  # countermonotone: Clayton's optimum is theta -> 0
    fit = fit_copula(u, v, "clayton")
    assert fit.boundary and fit.params[0] < 1e-3
    assert fit.to_report()["at_boundary"] is True


def test_ifm_recovers_clayton_through_garch_margins():
    sim = simulate_system(SimulationConfig(seed=3, length=2000, margin_x=RET, margin_y=AR2,
                                           copula=ClaytonCopula(2.0)))
    res = fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, "clayton", jackknife=None, n_starts=2)
    assert res.copula_fit.params[0] == pytest.approx(2.0, abs=0.15)
    assert res.u.size == res.v.size == res.months.size == 1998
    assert res.months[0] == sim.x.months[2]


def test_ifm_independent_margins_rarely_positive():
    small = 0
    for i in range(200):
        sim = simulate_system(SimulationConfig(seed=5000 + i, length=2000, margin_x=RET,
                                               margin_y=AR2))
        res = fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, "clayton", jackknife=None, n_starts=1, seed=i)
        small += res.copula_fit.params[0] < 0.05
    assert small >= 180


def test_cml_ranks_and_invariance():
    x, y = _clayton_pairs(2.0, 2000, 5)
    u = pseudo_observations(x)
    assert np.array_equal(np.sort(u), np.arange(1, 2001) / 2001)
    fit = fit_cml(x, y)
    assert fit.params[0] == pytest.approx(2.0, abs=0.2)
    assert fit.method == "cml"
    again = fit_cml(np.log(x) * 3 + 1, np.exp(y))
    assert again.params[0] == fit.params[0]
    with pytest.raises(ValueError, match="30"):
        fit_cml(x[:20], y[:20])
    with pytest.raises(ValueError, match="constant"):
        fit_cml(np.ones(50), y[:50])
    # average ranks for ties
    assert list(pseudo_observations([1.0, 1.0, 2.0])) == [0.375, 0.375, 0.75]


def test_cml_and_ifm_agree_within_two_joint_se():
    sim = simulate_system(SimulationConfig(seed=8, length=400, margin_x=RET, margin_y=AR2,
                                           copula=ClaytonCopula(2.0)))
    ifm = fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, "clayton", jackknife="copula", n_starts=2)
    keep_x = np.isin(ifm.margin_x.months, ifm.months)
    keep_y = np.isin(ifm.margin_y.months, ifm.months)
    cml = fit_cml(ifm.margin_x.std_resid[keep_x], ifm.margin_y.std_resid[keep_y], jackknife="copula")
    diff = ifm.copula_fit.params[0] - cml.params[0]
    joint = math.hypot(ifm.copula_fit.se[0], cml.se[0])
    assert abs(diff) < 2 * joint


def test_jackknife_mean_is_classical_se():
    x = np.random.default_rng(6).normal(size=57)
    se = jackknife_se(np.mean, x)
    assert se[0] == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-13)


@given(st.integers(2, 40), st.floats(-1e6, 1e6))
def test_constant_estimator_zero_se(n, c):
    assert jackknife_se(lambda d: c, np.zeros(n))[0] == 0.0
    assert np.all(jackknife_se_from_replicates(np.full((n, 3), c)) == 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_jackknife_formula(seed):
    reps = np.random.default_rng(seed).normal(size=(15, 2))
    m = reps.shape[0]
    ref = np.sqrt((m - 1) / m * ((reps - reps.mean(0)) ** 2).sum(0))
    assert np.allclose(jackknife_se_from_replicates(reps), ref, rtol=1e-14)


def test_jackknife_drops_failed_replicates():
    def rep(i):
        if i == 3:
            raise ConvergenceError("no")
        return np.nan if i == 7 else float(i)
    with pytest.warns(RuntimeWarning, match="2 jackknife"):
        reps, dropped = jackknife_replicates(rep, 100)
    assert dropped == 2 and reps.shape == (98, 1)
    with pytest.raises(ConvergenceError, match="6 of 100"):
        jackknife_replicates(lambda i: np.nan if i < 6 else 1.0, 100)


def test_copula_jackknife_se_positive_and_labelled():
    u, v = _clayton_pairs(2.0, 120, 7)
    fit = copula_jackknife(fit_copula(u, v, "clayton"), u, v)
    assert fit.se[0] > 0 and fit.jackknife == "copula-only"
    assert fit.t_ratios[0] == fit.params[0] / fit.se[0]
    assert fit.significant[0]
    rep = fit.to_report()
    assert rep["params.theta.t_ratio"] == pytest.approx(fit.t_ratios[0])


def test_full_jackknife_runs_both_steps():
    sim = simulate_system(SimulationConfig(seed=12, length=80, margin_x=RET, margin_y=AR2,
                                           copula=ClaytonCopula(1.0)))
    res = fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, "clayton", jackknife="full", n_starts=2)
    cfit = res.copula_fit
    assert cfit.jackknife == "full two-step" and cfit.se[0] > 0
    quick = fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, "clayton", jackknife="copula",
                    margins=(res.margin_x, res.margin_y))
    assert quick.copula_fit.params[0] == cfit.params[0]
    with pytest.raises(ValueError):
        fit_ifm(sim.x, sim.y, SPEC_X, SPEC_Y, jackknife="bootstrap",
                margins=(res.margin_x, res.margin_y))


def test_significance_conventions():
    cop = ClaytonCopula(1.0)
    fit = CopulaFit(cop, 1.0, 100, se=np.array([1 / 1.7]))
    assert fit.significant[0]  # t = 1.7 > 1.645 one-sided
    g = CopulaFit(GaussianCopula(-0.17), 1.0, 100, se=np.array([0.1]))
    assert not g.significant[0]  # |t| = 1.7 < 1.96
    assert CopulaFit(cop, 1.0, 100).t_ratios is None


def test_implied_measures():
    fit = CopulaFit(ClaytonCopula(2.0), 0.0, 10)
    imp = fit.implied
    assert imp["kendall_tau"] == pytest.approx(0.5)
    assert imp["lambda_lower"] == pytest.approx(2 ** -0.5)
    assert imp["lambda_upper"] == 0.0
    assert 0.5 < imp["spearman_rho"] < 0.75


def test_rank_and_select():
    u, v = _clayton_pairs(2.0, 600, 13)
    ranked = rank_copulas(u, v, ["clayton"])
    assert len(ranked) == 1 and ranked[0].family == "clayton"
    ranked = rank_copulas(u, v, ["gaussian", "gumbel", "clayton"])
    assert [f.aic for f in ranked] == sorted(f.aic for f in ranked)
    assert ranked[0].family == "clayton"
    with pytest.raises(ValueError):
        rank_copulas(u, v, [])
    sim = simulate_system(SimulationConfig(seed=14, length=500, margin_x=RET, margin_y=AR2,
                                           copula=GaussianCopula(0.5)))
    ranking, (fx, fy) = select_family(sim.x, sim.y, SPEC_X, SPEC_Y, ["gaussian", "clayton", "gumbel"],
                                      n_starts=2)
    assert ranking[0].family == "gaussian"
    assert {f.nobs for f in ranking} == {498}


def test_pit_validation():
    with pytest.raises(ValueError, match="inside"):
        fit_copula([0.0, 0.5], [0.5, 0.5], "clayton")
    with pytest.raises(ValueError):
        fit_copula([0.2, 0.5], [0.5], "clayton")
    with pytest.raises(ValueError):
        fit_copula([0.2, 0.5], [0.5, 0.3], "frank")
