import json

import numpy as np
import pytest
from scipy import stats

from newscopula.copulas import ClaytonCopula
from newscopula.diagnostics import ks_test
from newscopula.empirical_copula import copula_table
from newscopula.news_index import THEMES, build_index_series
from newscopula.simulate import (CorpusConfig, MarginParams, SimulationConfig, load_simulation_config,
                                 make_rng, simulate_garch, simulate_news_corpus, simulate_system)

AR2 = MarginParams(const=0.02, ar=(0.243, 0.279), omega=0.019, persistence=0.497, arch=0.088)


def test_independent_innovations_have_zero_tau():
    sim = simulate_system(SimulationConfig(seed=1, length=5000, margin_x=AR2, margin_y=AR2))
    ex = stats.norm.ppf(sim.u) * np.sqrt(sim.sigma2_x)
    ey = stats.norm.ppf(sim.v) * np.sqrt(sim.sigma2_y)
    assert abs(stats.kendalltau(ex, ey)[0]) < 0.03
    assert ks_test(sim.u).p_value > 0.01 and ks_test(sim.v).p_value > 0.01


def test_clayton_system_lower_corner_excess():
    sim = simulate_system(SimulationConfig(seed=2, length=2000, copula=ClaytonCopula(2.0)))
    assert copula_table(sim.u, sim.v, 4).counts[0, 0] > 2000 / 16


def test_same_seed_identical_and_seeds_differ():
    cfg = SimulationConfig(seed=3, length=200, margin_x=AR2, copula=ClaytonCopula(1.0))
    a, b = simulate_system(cfg), simulate_system(cfg)
    assert np.array_equal(a.x.values, b.x.values) and np.array_equal(a.v, b.v)
    c = simulate_system(SimulationConfig(seed=4, length=200, margin_x=AR2))
    assert not np.array_equal(a.x.values, c.x.values)


def test_replicate_streams_independent_of_order():
    first = [make_rng(9, i).normal() for i in range(5)]
    rev = [make_rng(9, i).normal() for i in reversed(range(5))][::-1]
    assert first == rev


@pytest.mark.parametrize("persistence,arch", [(0.497, 0.088), (0.7, 0.2), (0.85, 0.1)])
def test_garch_variance_stabilises(persistence, arch):
    # needs a finite fourth moment: 3a^2 + 2ab + b^2 < 1
    assert 3 * arch ** 2 + 2 * arch * persistence + persistence ** 2 < 1
    eps, s2 = simulate_garch(100_000, 0.0004, persistence, arch, seed=5)
    target = 0.0004 / (1 - persistence - arch)
    assert eps.var() == pytest.approx(target, rel=0.10)
    assert np.all(s2 > 0)


def test_ar_mean_recursion():
    sim = simulate_system(SimulationConfig(seed=6, length=300, margin_x=AR2, margin_y=AR2))
    x = sim.x.values
    e = stats.norm.ppf(sim.u) * np.sqrt(sim.sigma2_x)
    ref = 0.02 + 0.243 * x[1:-1] + 0.279 * x[:-2] + e[2:]
    assert np.allclose(x[2:], ref)


def test_invalid_params():
    with pytest.raises(ValueError):
        MarginParams(persistence=0.8, arch=0.3)
    with pytest.raises(ValueError):
        MarginParams(omega=0.0)
    with pytest.raises(ValueError):
        SimulationConfig(seed=0, length=0)


def test_balanced_corpus_mean_index_near_zero():
    recs = simulate_news_corpus(CorpusConfig(seed=7, n_months=184))
    idx = build_index_series(recs)
    assert abs(idx.mni.values.mean()) < 0.05


def test_all_positive_corpus():
    recs = simulate_news_corpus(CorpusConfig(seed=8, n_months=12, balance=1.0, neutral_share=0.0))
    idx = build_index_series(recs)
    for theme in THEMES:
        assert np.all(idx.sub_indexes[theme].values == 1.0)


def test_corpus_volumes_match_intensity():
    cfg = CorpusConfig(seed=9, n_months=100)
    recs = simulate_news_corpus(cfg)
    for theme in THEMES:
        vol = np.mean([r.total for r in recs if r.theme == theme])
        assert vol == pytest.approx(cfg.intensity[theme], rel=0.10)
    with pytest.raises(ValueError):
        simulate_news_corpus(CorpusConfig(seed=1, n_months=3, balance=2.0))


def test_config_file(tmp_path):
    doc = {"seed": 5, "length": 50, "labels": ["r", "m"],
           "margin_x": {"const": 0.1, "exog": [{"spec": {"label": "z", "phi": 0.3}, "beta": 0.5}]},
           "margin_y": {"ar": [0.2]}, "copula": {"family": "gumbel", "params": [1.5]}}
    path = tmp_path / "sim.json"
    path.write_text(json.dumps(doc))
    cfg = load_simulation_config(path)
    sim = simulate_system(cfg)
    assert sim.x.label == "r" and "z" in sim.exog
    assert cfg.copula.params[0] == 1.5
