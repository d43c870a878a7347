import json

import numpy as np
import pytest

from conftest import APRIL_2014_SUBINDEX
from newscopula.cli import main
from newscopula.copulas import ClaytonCopula
from newscopula.news_index import write_counts
from newscopula.pipeline import load_run_config, robustness
from newscopula.series import read_series, read_table, write_table
from newscopula.simulate import (CorpusConfig, ExogSpec, MarginParams, SimulationConfig,
                                 make_rng, simulate_news_corpus, simulate_system)

SURPRISE = ExogSpec("surprise", phi=0.3, sd=1.0)
RET = MarginParams(const=0.008, exog=((SURPRISE, 0.003),), omega=0.0004, persistence=0.76, arch=0.2)
AR2 = MarginParams(const=0.02, ar=(0.243, 0.279), omega=0.019, persistence=0.497, arch=0.088)


def _fixture(tmp_path, seed=1, copula=ClaytonCopula(2.0), length=180, coupling=0.0, **cfg):
    """Write a simulated data file and a run config; returns the config path."""
    sim = simulate_system(SimulationConfig(seed=seed, length=length, margin_x=RET, margin_y=AR2,
                                           copula=copula, labels=("returns", "mni")))
    r = make_rng(seed, 77)
    volume = 100 + 0.05 * np.arange(length) + r.normal(size=length)
    volume += coupling * np.abs(sim.x.values)
    write_table(tmp_path / "data.csv", {"month": sim.x.month_labels, "returns": list(sim.x.values),
                                        "mni": list(sim.y.values),
                                        "surprise": list(sim.exog["surprise"].values),
                                        "volume": list(volume)})
    doc = {"returns": {"path": "data.csv", "column": "returns"},
           "index": {"path": "data.csv", "column": "mni"},
           "controls": [{"path": "data.csv", "column": "surprise"}],
           "volume": {"path": "data.csv", "column": "volume"},
           "jackknife": "copula", "seed": 3} | cfg
    (tmp_path / "run.json").write_text(json.dumps(doc))
    return tmp_path / "run.json"


def test_build_index_april_2014(tmp_path, april_counts_file, capsys):
    out = tmp_path / "idx.csv"
    assert main(["build-index", str(april_counts_file), "-o", str(out)]) == 0
    text = capsys.readouterr().out
    assert "Total" in text or "total" in text
    for theme, col in (("employment", "eni"), ("housing", "hni"), ("industry", "ini"), ("energy", "enni")):
        assert read_series(out, col).values[0] == pytest.approx(APRIL_2014_SUBINDEX[theme], abs=0.005)


def test_build_index_empty_file_exit_2(tmp_path, capsys):
    (tmp_path / "empty.csv").write_text("")
    assert main(["build-index", str(tmp_path / "empty.csv")]) == 2
    assert "empty" in capsys.readouterr().err


def test_build_index_corpus_totals(tmp_path, capsys):
    recs = simulate_news_corpus(CorpusConfig(seed=3, n_months=24))
    write_counts(tmp_path / "c.csv", recs)
    assert main(["build-index", str(tmp_path / "c.csv"), "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    total = sum(r.total for r in recs)
    assert doc["totals.total.total"] == total


def test_analyze_clayton_fixture(tmp_path, capsys):
    cfg = _fixture(tmp_path)
    assert main(["analyze", str(cfg), "--format", "structured", "--output-dir",
                 str(tmp_path / "out")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status.ok"] is True
    assert doc["selection.rank1.family"] == "clayton"
    assert doc["final.params.theta.estimate"] == pytest.approx(2.0, abs=0.6)
    assert doc["final.params.theta.significant_5pct"] is True
    assert doc["copula_table.max_excess_cell"] == "1,1"
    assert (tmp_path / "out" / "report.json").exists()
    pits = read_table(tmp_path / "out" / "pits.csv")
    assert len(pits["month"]) == doc["final.nobs"]


def test_analyze_text_layout(tmp_path, capsys):
    cfg = _fixture(tmp_path, family="clayton", jackknife="none")
    assert main(["analyze", str(cfg), "--format", "text", "--candidates", "gaussian,clayton"]) == 0
    text = capsys.readouterr().out
    for piece in ("Unit Root", "Do not reject", "Bin", "AIC", "BIC", "LogL", "lambda"):
        assert piece in text


def test_analyze_independence_boundary(tmp_path, capsys):
    cfg = _fixture(tmp_path, seed=4, copula=None, length=600, family="clayton", jackknife="none")
    # countermonotone news index pushes Clayton onto theta = 0
    data = read_table(tmp_path / "data.csv")
    data["mni"] = [str(-float(x)) for x in data["returns"]]
    write_table(tmp_path / "data.csv", data)
    assert main(["analyze", str(cfg), "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["final.at_boundary"] is True


def test_missing_column_exit_2(tmp_path, capsys):
    cfg = _fixture(tmp_path)
    doc = json.loads(cfg.read_text())
    doc["index"]["column"] = "nope"
    cfg.write_text(json.dumps(doc))
    assert main(["analyze", str(cfg), "--format", "structured"]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["status.ok"] is False and "nope" in out["status.error"]


def test_bad_config_exit_2(tmp_path):
    cfg = _fixture(tmp_path)
    assert main(["analyze", str(cfg), "--k", "1"]) == 2
    doc = json.loads(cfg.read_text())
    doc["unknown_key"] = 1
    cfg.write_text(json.dumps(doc))
    assert main(["analyze", str(cfg)]) == 2


def test_analyze_deterministic(tmp_path):
    cfg = _fixture(tmp_path)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", str(cfg), "--format", "structured", "--report", str(a)]) == 0
    assert main(["analyze", str(cfg), "--format", "structured", "--report", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_robustness_reports_three_stages(tmp_path, capsys):
    cfg = _fixture(tmp_path, family="clayton")
    assert main(["robustness", str(cfg)]) == 0
    text = capsys.readouterr().out
    assert "de-trended news volume" in text
    assert "remains significant with the new t-ratio of" in text


def test_robustness_missing_volume_exit_2(tmp_path, capsys):
    cfg = _fixture(tmp_path)
    doc = json.loads(cfg.read_text())
    del doc["volume"]
    cfg.write_text(json.dumps(doc))
    assert main(["robustness", str(cfg)]) == 2
    assert "volume" in capsys.readouterr().err + (tmp_path / "run.json").read_text()


def test_robustness_volume_coefficient_size_and_power(tmp_path):
    insignificant = 0
    for i in range(40):
        cfg = _fixture(tmp_path, seed=100 + i, family="clayton", jackknife="none")
        rep = robustness(load_run_config(cfg))
        insignificant += not rep.entries["volume_regression.significant_5pct"]
    assert insignificant >= 36
    cfg = _fixture(tmp_path, seed=5, coupling=200.0, family="clayton", jackknife="none")
    assert robustness(load_run_config(cfg)).entries["volume_regression.significant_5pct"]


def test_component_commands(tmp_path, capsys):
    cfg = _fixture(tmp_path, length=240)
    data = tmp_path / "data.csv"
    assert main(["diagnose", str(data), "--columns", "returns,mni", "--lags", "6"]) == 0
    assert "Unit Root" in capsys.readouterr().out
    assert main(["fit-marginal", str(data), "--column", "mni", "--ar-lags", "1,2",
                 "--pit-out", str(tmp_path / "pit.csv"), "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert "params.ar2.estimate" in " ".join(doc)
    pit = read_series(tmp_path / "pit.csv", "pit")
    assert np.all((pit.values > 0) & (pit.values < 1))
    assert main(["copula-table", str(data), "--u", "returns", "--v", "mni"]) == 0
    assert "expected per cell" in capsys.readouterr().out
    assert main(["fit-copula", "--config", str(cfg), "--family", "clayton", "--jackknife", "none",
                 "--format", "structured"]) == 0
    assert json.loads(capsys.readouterr().out)["copula.family"] == "clayton"
    assert main(["fit-copula", str(data), "--u", "returns", "--v", "mni", "--method", "cml",
                 "--family", "gaussian"]) == 0
    capsys.readouterr()
    assert main(["select-copula", "--config", str(cfg), "--candidates", "gaussian,clayton",
                 "--format", "structured"]) == 0
    assert json.loads(capsys.readouterr().out)["selection.rank1.family"] == "clayton"


def test_simulate_command(tmp_path, capsys):
    (tmp_path / "s.json").write_text(json.dumps(
        {"seed": 1, "length": 60, "labels": ["returns", "mni"],
         "copula": {"family": "clayton", "params": [2.0]}}))
    assert main(["simulate", str(tmp_path / "s.json"), "-o", str(tmp_path / "o.csv")]) == 0
    cols = read_table(tmp_path / "o.csv")
    assert {"month", "returns", "mni", "u_true", "v_true"} <= set(cols)
    assert len(cols["month"]) == 60
    (tmp_path / "c.json").write_text(json.dumps({"seed": 2, "corpus": {"n_months": 5}}))
    assert main(["simulate", str(tmp_path / "c.json"), "-o", str(tmp_path / "c.csv")]) == 0
    assert main(["build-index", str(tmp_path / "c.csv")]) == 0
