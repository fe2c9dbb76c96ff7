import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from kdesampling.bench import (CellResult, ExperimentConfig, Report, emit_report,
                               emit_summary_csv, load_config, parse_config_text,
                               report_from_json, run_experiment)
from kdesampling.bench import harness
from kdesampling.bench.config import DatasetSource, config_from_pairs
from kdesampling.dataset import Dataset, write_csv
from kdesampling.exceptions import ConfigError

GOLDEN = Path(__file__).parent / "golden"

SMALL = """
datasets = blobs
samplers = kde
classifiers = knn
replications = 2
seed = 5
dataset.blobs.generator = donut
dataset.blobs.n_total = 120
"""


def small_cfg(**changes):
    cfg = parse_config_text(SMALL)
    return dataclasses.replace(cfg, **changes)


def test_cell_count_and_raw_baseline():
    report = run_experiment(small_cfg())
    assert report.config["samplers"] == ["raw", "kde"]
    assert len(report.cells) == 2 and report.n_cells == 4
    for cell in report.cells:
        assert not cell.failed
        for m in ("gmean", "f1", "auc"):
            assert len(cell.values[m]) == 2
            assert cell.means[m] == pytest.approx(sum(cell.values[m]) / 2, rel=1e-15)
            assert 0.0 <= cell.means[m] <= 1.0


def test_raw_always_first_even_if_listed():
    cfg = parse_config_text("datasets = donut\nsamplers = smote, raw, kde")
    assert cfg.samplers == ("raw", "smote", "kde")


def test_reports_byte_identical_serial_and_parallel():
    cfg = small_cfg(samplers=("smote", "nearmiss"), classifiers=("knn", "mlp"),
                    params=(("mlp.epochs", 5),))
    a = emit_report(run_experiment(cfg), "json")
    b = emit_report(run_experiment(cfg), "json")
    c = emit_report(run_experiment(small_cfg(
        samplers=("smote", "nearmiss"), classifiers=("knn", "mlp"),
        params=(("mlp.epochs", 5),), workers=2)), "json")
    assert a == b == c


def test_seed_changes_results():
    a = run_experiment(small_cfg()).mean("blobs", "kde", "knn", "auc")
    b = run_experiment(small_cfg(seed=6)).mean("blobs", "kde", "knn", "auc")
    assert a != b


def test_paired_design_shares_splits():
    # raw results do not depend on which other samplers are configured
    a = run_experiment(small_cfg(samplers=("kde",)))
    b = run_experiment(small_cfg(samplers=("ros", "smote")))
    assert a.cell("blobs", "raw", "knn").values == b.cell("blobs", "raw", "knn").values


def test_empty_report_csv_is_header_only():
    cfg = small_cfg().describe()
    report = Report(config=cfg, cells=[], best={})
    assert emit_report(report, "csv") == b"dataset,sampler,classifier,metric,rep_index,value\n"


def test_csv_long_format():
    report = run_experiment(small_cfg())
    lines = emit_report(report, "csv").decode().splitlines()
    assert lines[0] == "dataset,sampler,classifier,metric,rep_index,value"
    assert len(lines) == 1 + 2 * 3 * 2
    assert lines[1].startswith("blobs,raw,knn,gmean,0,")


def test_json_round_trip():
    report = run_experiment(small_cfg())
    data = emit_report(report, "json")
    assert emit_report(report_from_json(data), "json") == data
    obj = json.loads(data)
    assert set(obj) == {"config", "cells", "best"}


def fixed_report():
    cfg = ExperimentConfig(datasets=(DatasetSource("toy", generator="donut"),),
                           samplers=("smote", "kde"), classifiers=("knn", "mlp"),
                           replications=1).describe()
    cells = []
    vals = {("raw", "knn"): (0.5, 0.25, 0.75), ("smote", "knn"): (0.6, 0.5, 0.8),
            ("kde", "knn"): (0.6, 0.4, 0.9), ("raw", "mlp"): (0.7, 0.3, 0.85),
            ("smote", "mlp"): (None, None, None), ("kde", "mlp"): (0.65, 0.35, 0.875)}
    for (s, c), (g, f, a) in vals.items():
        metrics = {"gmean": g, "f1": f, "auc": a}
        errors = ["rep 0: FitError: singular"] if g is None else []
        cells.append(CellResult("toy", s, c, {m: [v] for m, v in metrics.items()},
                                dict(metrics), errors))
    best = {}
    for c in ("knn", "mlp"):
        for m in ("gmean", "f1", "auc"):
            vals_m = {x.sampler: x.means[m] for x in cells
                      if x.classifier == c and x.means[m] is not None}
            top = max(vals_m.values())
            best[f"toy|{c}|{m}"] = [s for s in ("raw", "smote", "kde") if vals_m.get(s) == top]
    return Report(config=cfg, cells=cells, best=best)


def test_markdown_golden():
    got = emit_report(fixed_report(), "markdown").decode()
    assert got == (GOLDEN / "report.md").read_text()


def test_markdown_joint_winners_both_bold():
    text = emit_report(fixed_report(), "markdown").decode()
    assert "| toy G | 0.500 | **0.600** | **0.600** |" in text
    assert "| toy G | **0.700** | na | 0.650 |" in text


def test_summary_csv():
    text = emit_summary_csv(fixed_report()).decode().splitlines()
    assert text[0] == "dataset,sampler,classifier,metric,mean,best,status"
    assert "toy,smote,mlp,gmean,na,0,failed" in text
    assert "toy,kde,knn,auc,0.9,1,ok" in text


def test_failed_cell_recorded_and_run_continues(tmp_path):
    r = np.random.default_rng(0)
    X = np.vstack([r.normal(size=(40, 2)), np.tile([[3.0, 3.0]], (8, 1))])
    y = np.r_[np.zeros(40, int), np.ones(8, int)]
    write_csv(Dataset(X, y), tmp_path / "dup.csv")
    # unstandardized so the minority covariance is exactly zero and the jitter
    # retry (which scales with its trace) cannot help
    cfg = config_from_pairs([("datasets", "dup"), ("samplers", "kde, ros"),
                             ("standardize", "false"),
                             ("dataset.dup.csv", str(tmp_path / "dup.csv"))])
    report = run_experiment(cfg)
    kde = report.cell("dup", "kde", "knn")
    assert kde.failed and kde.means["gmean"] is None
    assert all(v is None for v in kde.values["auc"])
    assert "FitError" in kde.errors[0]
    assert not report.cell("dup", "ros", "knn").failed
    assert ",na\n" in emit_report(report, "csv").decode()


def test_leakage_guard(monkeypatch):
    calls = iter(range(10 ** 6))
    monkeypatch.setattr(harness, "_digest", lambda ds: str(next(calls)))
    report = run_experiment(small_cfg(replications=1))
    assert all("LeakageError" in c.errors[0] for c in report.cells)


def test_standardize_uses_train_statistics():
    r = np.random.default_rng(0)
    train = Dataset(r.normal(5, 3, (30, 2)), np.r_[np.zeros(25, int), np.ones(5, int)])
    test = Dataset(r.normal(5, 3, (10, 2)), np.r_[np.zeros(8, int), np.ones(2, int)])
    tr, te = harness.standardize(train, test)
    np.testing.assert_allclose(tr.features.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(tr.features.std(axis=0), 1, atol=1e-12)
    mu, sd = train.features.mean(axis=0), train.features.std(axis=0)
    np.testing.assert_allclose(te.features, (test.features - mu) / sd)


# -- configuration -------------------------------------------------------------------

def test_config_parsing_and_overrides():
    text = """
    # comment line
    datasets = ecoli, cube
    samplers = smote, kde   # trailing comment
    classifiers = knn, mlp
    replications = 3
    standardize = no
    smote.k = 7
    dataset.cube.n_minority = 50
    dataset.cube.mu = 1, 2, 3
    """
    cfg = parse_config_text(text, [("replications", "4"), ("seed", "9")])
    assert cfg.replications == 4 and cfg.seed == 9 and cfg.standardize is False
    assert cfg.param("smote.k") == 7
    ecoli, cube = cfg.datasets
    assert ecoli.csv == "fixture:ecoli"
    assert dict(cube.params) == {"n_minority": 50, "mu": (1.0, 2.0, 3.0)}


@pytest.mark.parametrize("text", [
    "datasets = donut\nbogus = 1",
    "datasets = donut\nreplications = two",
    "datasets = donut\nsamplers = tomek",
    "datasets = nowhere",
    "datasets = donut\ndataset.other.csv = x.csv",
    "datasets = donut\ndataset.donut.radius = 3",
    "datasets = donut\nreplications = 0",
    "samplers = kde",
    "datasets = donut\nthis line has no equals",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_relative_csv_resolves_against_config_dir(tmp_path):
    sub = tmp_path / "cfg"
    sub.mkdir()
    (sub / "exp.cfg").write_text("datasets = mine\ndataset.mine.csv = data/mine.csv\n")
    cfg = load_config(sub / "exp.cfg")
    assert cfg.datasets[0].csv == str(sub / "data" / "mine.csv")


def test_generator_seed_echoed():
    report = run_experiment(small_cfg(replications=1))
    entry = report.config["datasets"][0]
    assert entry["resolved_seed"] == harness.resolved_generator_seed(
        small_cfg().datasets[0], 5)


def test_fixture_dataset_runs(ecoli):
    cfg = parse_config_text("datasets = ecoli\nsamplers = nearmiss\nreplications = 1")
    report = run_experiment(cfg)
    assert not any(c.failed for c in report.cells)
