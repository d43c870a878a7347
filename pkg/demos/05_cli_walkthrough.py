"""End-to-end command-line session on simulated data.

Writes a simulation config and a run config to a scratch directory, then
drives the ``newscopula`` command through simulate, analyze and
robustness.  Every step is printed before it runs.

Run:  python3 demos/05_cli_walkthrough.py
"""
import json
import shlex
import sys
import tempfile
from pathlib import Path

from newscopula.cli import main
from newscopula.series import read_table, write_table

work = Path(tempfile.mkdtemp(prefix="newscopula-demo-"))
(work / "sim.json").write_text(json.dumps({
    "seed": 11, "length": 180, "labels": ["returns", "mni"],
    "margin_x": {"const": 0.008, "omega": 0.0004, "persistence": 0.76, "arch": 0.2,
                 "exog": [{"spec": {"label": "surprise", "phi": 0.3}, "beta": 0.003}]},
    "margin_y": {"const": 0.02, "ar": [0.243, 0.279], "omega": 0.019,
                 "persistence": 0.497, "arch": 0.088},
    "copula": {"family": "clayton", "params": [1.5]}}, indent=1))
(work / "corpus.json").write_text(json.dumps({"seed": 3, "corpus": {"n_months": 180}}))


def run(*argv):
    print(f"\n$ newscopula {shlex.join(argv)}", flush=True)
    code = main(list(argv))
    sys.stdout.flush()
    print(f"[exit {code}]")
    return code


run("simulate", str(work / "corpus.json"), "-o", str(work / "counts.csv"))
run("build-index", str(work / "counts.csv"), "-o", str(work / "index.csv"))
run("simulate", str(work / "sim.json"), "-o", str(work / "data.csv"))

# Attach a news-volume column for the robustness step.
data = read_table(work / "data.csv")
index = read_table(work / "index.csv")
vol = [sum(float(index[c][i]) for c in index if c.startswith("volume_"))
       for i in range(len(data["month"]))]
data["volume"] = [str(x) for x in vol]
write_table(work / "data.csv", data)

(work / "run.json").write_text(json.dumps({
    "returns": {"path": "data.csv", "column": "returns"},
    "index": {"path": "data.csv", "column": "mni"},
    "controls": [{"path": "data.csv", "column": "surprise"}],
    "volume": {"path": "data.csv", "column": "volume"},
    "jackknife": "copula", "seed": 1}, indent=1))

run("analyze", str(work / "run.json"), "--output-dir", str(work / "out"))
run("robustness", str(work / "run.json"), "--family", "clayton")
# A missing input is an input error: exit code 2.
run("copula-table", str(work / "data.csv"), "--u", "returns", "--v", "no_such_column")
print(f"\nfiles in {work}: {sorted(p.name for p in work.rglob('*') if p.is_file())}")
