import json

import numpy as np
import pytest

from butterflynet.errors import ValidationError
from butterflynet.harness.config import ExperimentConfig, apply_defaults, parse_config
from butterflynet.harness.results import ResultTable, config_digest, write_plotdata


def test_defaults_desk_vs_paper():
    desk = apply_defaults(ExperimentConfig(task="train-ft"))
    assert (desk.n, desk.k, desk.depth, desk.cheb_order) == (128, 8, 5, 3)
    assert desk.steps == 2_000 and desk.steps_rand == 4_000
    paper = apply_defaults(ExperimentConfig(task="train-ft", paper_scale=True))
    assert paper.steps == 10_000 and paper.eval_size == 16_384
    approx = apply_defaults(ExperimentConfig(task="approx-ft"))
    assert approx.n == 4_096 and approx.sweep_depths == (6, 7, 8, 9, 10)
    approx_paper = apply_defaults(ExperimentConfig(task="approx-ft", paper_scale=True))
    assert approx_paper.n == 16_384 and approx_paper.rate_windows == (64, 128, 256)


def test_parse_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "task = train-ft\n"
        "seed = 7\n"
        "steps = 50        # comment\n"
        "sweep_depths = 4 5\n"
        "paper_scale = false\n"
    )
    cfg = parse_config(path)
    assert cfg.task == "train-ft" and cfg.seed == 7 and cfg.steps == 50
    assert cfg.sweep_depths == (4, 5)


def test_parse_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("task train-ft\n")
    with pytest.raises(ValidationError, match="key=value"):
        parse_config(bad)
    missing = tmp_path / "missing.cfg"
    missing.write_text("seed = 1\n")
    with pytest.raises(ValidationError, match="task"):
        parse_config(missing)
    unk = tmp_path / "unk.cfg"
    unk.write_text("task = no-such-task\n")
    with pytest.raises(ValidationError, match="unknown task"):
        parse_config(unk)


def test_config_digest_stable_and_sensitive():
    d1 = config_digest({"a": 1, "b": "x"})
    d2 = config_digest({"b": "x", "a": 1})
    d3 = config_digest({"a": 2, "b": "x"})
    assert d1 == d2 and d1 != d3 and len(d1) == 12


def test_result_table_files(tmp_path):
    table = ResultTable({"task": "demo", "seed": 0})
    table.add("alpha", 1.25)
    table.add("beta", 2.5, std=0.125)
    csv_path, json_path = tmp_path / "results.csv", tmp_path / "results.json"
    table.write_csv(csv_path)
    table.write_json(json_path)
    lines = csv_path.read_text().strip().split("\n")
    assert lines[0] == "config,metric,value,std"
    assert lines[1].endswith(",alpha,1.25,")
    assert lines[2].endswith(",beta,2.5,0.125")
    doc = json.loads(json_path.read_text())
    assert doc["rows"][0]["metric"] == "alpha"
    prov = doc["provenance"]
    assert prov["float_precision"] == "float64"
    assert "kernel_sign_convention" in prov and "dft_normalization" in prov
    assert table.get("alpha") == 1.25
    with pytest.raises(KeyError):
        table.get("gamma")


def test_plotdata_format(tmp_path):
    path = tmp_path / "plot.csv"
    write_plotdata(path, {"x": np.array([1.0, 2.0]), "y": np.array([0.5, 0.25])})
    assert path.read_text() == "x,y\n1.0,0.5\n2.0,0.25\n"
