import json

import numpy as np
import pytest

from synth import make_synthetic_dataset
from skintone.cli import main
from skintone.classifiers import ModelSpec


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_ws")
    manifest = make_synthetic_dataset(root, n_per_class=3,
                                      images_per_individual=2, seed=2,
                                      individual_spread=2.0)
    return root, manifest


def run(*argv):
    return main([str(a) for a in argv])


def test_unknown_flag_exits_2(workspace, capsys):
    root, manifest = workspace
    with pytest.raises(SystemExit) as exc:
        run("split", "--manifest", manifest, "--frobnicate")
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_command_exits_2(workspace):
    with pytest.raises(SystemExit) as exc:
        run("transmogrify")
    assert exc.value.code == 2


def test_operation_error_exits_1(workspace, tmp_path, capsys):
    rc = run("split", "--manifest", tmp_path / "missing.jsonl",
             "--out", tmp_path / "plan.json")
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_split_writes_plan_and_run_record(workspace, tmp_path):
    root, manifest = workspace
    out = tmp_path / "plan.json"
    rc = run("split", "--manifest", manifest, "--mode", "ind",
             "--fractions", "0.8,0,0.2", "--seed", "7", "--out", out)
    assert rc == 0
    plan = json.loads(out.read_text())
    assert plan["mode"] == "IND"
    assert plan["seed"] == 7
    record = json.loads((tmp_path / "plan.json.run.json").read_text())
    assert record["seed"] == 7
    assert "config_hash" in record and "versions" in record


def test_full_pipeline_extract_split_train_eval(workspace, tmp_path):
    root, manifest = workspace
    features = tmp_path / "features.csv"
    assert run("extract", "--manifest", manifest, "--out", features,
               "--region", "full", "--bins", "16") == 0
    assert (tmp_path / "features.csv.layout.json").exists()

    plan = tmp_path / "plan.json"
    assert run("split", "--manifest", manifest, "--mode", "ind",
               "--fractions", "0.7,0,0.3", "--seed", "1", "--out", plan) == 0

    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(ModelSpec("KNN", k=1).to_dict()))
    model = tmp_path / "model.json"
    assert run("train", "--features", features, "--spec", spec_path,
               "--plan", plan, "--train-part", "train", "--out", model) == 0

    report = tmp_path / "report.json"
    assert run("eval", "--features", features, "--model", model,
               "--plan", plan, "--part", "test", "--out", report) == 0
    body = json.loads(report.read_text())
    assert set(body) >= {"confusion", "acc", "bacc", "ooacc", "wooacc"}
    assert 0.0 <= body["bacc"] <= 1.0


def test_tune_and_cv(workspace, tmp_path):
    root, manifest = workspace
    features = tmp_path / "features.csv"
    run("extract", "--manifest", manifest, "--out", features, "--bins", "16")

    plan = tmp_path / "holdout.json"
    run("split", "--manifest", manifest, "--mode", "ind",
        "--fractions", "0.5,0.3,0.2", "--seed", "3", "--out", plan)
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps([ModelSpec("KNN", k=1).to_dict(),
                                     ModelSpec("KNN", k=5).to_dict()]))
    best_out = tmp_path / "best.json"
    assert run("tune", "--features", features, "--grid", grid_path,
               "--plan", plan, "--out", best_out) == 0
    best = json.loads(best_out.read_text())
    assert best["best"]["family"] == "KNN"
    assert len(best["table"]) == 2

    folds = tmp_path / "folds.json"
    assert run("split", "--manifest", manifest, "--kfold", "3",
               "--seed", "2", "--out", folds) == 0
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(ModelSpec("KNN", k=1).to_dict()))
    cv_out = tmp_path / "cv.json"
    assert run("cv", "--features", features, "--spec", spec_path,
               "--plan", folds, "--out", cv_out) == 0
    result = json.loads(cv_out.read_text())
    assert len(result["folds"]) == 3


def test_balance_command(workspace, tmp_path):
    root, manifest = workspace
    out = tmp_path / "balance.json"
    assert run("balance", "--manifest", manifest, "-m", "1",
               "--seed", "4", "--out", out) == 0
    body = json.loads(out.read_text())
    assert body["max_per_individual"] == 1
    assert len(body["selected"]) == 30  # one image per individual


def test_agree_command(workspace, tmp_path, capsys):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    for path, annotator, offset in ((a, "a1", 0), (b, "a2", 1)):
        with open(path, "w") as fh:
            for i in range(12):
                label = 1 + (i + offset) % 9
                fh.write(json.dumps({"individual_id": f"p{i}",
                                     "annotator_id": annotator,
                                     "label": label, "timestamp": 0}) + "\n")
    out = tmp_path / "agree.json"
    assert run("agree", "--labels", a, b, "--out", out) == 0
    body = json.loads(out.read_text())
    for key in ("exact_agreement", "offbyone_agreement", "icc3",
                "krippendorff_alpha"):
        assert key in body


def test_audit_command(workspace, tmp_path):
    root, manifest = workspace
    features = tmp_path / "features.csv"
    run("extract", "--manifest", manifest, "--out", features, "--bins", "16")
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(ModelSpec("KNN", k=1).to_dict()))
    model = tmp_path / "model.json"
    run("train", "--features", features, "--spec", spec_path, "--out", model)

    out = tmp_path / "audit.json"
    assert run("audit", "--model", model, "--manifest", manifest,
               "--region", "full", "--bins", "16", "--out", out) == 0
    body = json.loads(out.read_text())
    assert body["classified"] == 60
    svg = tmp_path / "audit.svg"
    assert run("audit", "--model", model, "--manifest", manifest,
               "--region", "full", "--bins", "16", "--out", svg,
               "--format", "svg") == 0
    assert svg.read_text().startswith("<svg")


def test_config_file_and_unknown_key_rejected(workspace, tmp_path):
    root, manifest = workspace
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"desc": {"bins": 32}}))
    features = tmp_path / "f32.csv"
    assert run("extract", "--manifest", manifest, "--out", features,
               "--config", cfg) == 0
    layout = json.loads((tmp_path / "f32.csv.layout.json").read_text())
    assert layout["bins"] == 32

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"desc": {"bins": 32}, "extra": 1}))
    assert run("extract", "--manifest", manifest, "--out", features,
               "--config", bad) == 1


def test_env_var_config_fallback(workspace, tmp_path, monkeypatch):
    root, manifest = workspace
    cfg = tmp_path / "env_config.json"
    cfg.write_text(json.dumps({"desc": {"bins": 64}}))
    monkeypatch.setenv("STW_CONFIG", str(cfg))
    features = tmp_path / "f64.csv"
    assert run("extract", "--manifest", manifest, "--out", features) == 0
    layout = json.loads((tmp_path / "f64.csv.layout.json").read_text())
    assert layout["bins"] == 64
