import csv
import json

import numpy as np
import pytest

from adatsk.cli import main, parse_config
from adatsk.data import load_bundled, make_high_dim_dataset, minmax_normalize, save_csv
from adatsk.io import load_model, model_from_dict, model_to_dict, read_gate_history, save_model
from adatsk.pipeline import run_pipeline
from adatsk.training import TrainConfig

FAST = """\
dataset = bundled:iris
eta = 0.1
iterations_fs = 20   # keep the suite quick
iterations_re = 20
iterations_ft = 20
iterations_plain = 20
folds = 10
"""


def config(tmp_path, text=FAST, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


@pytest.fixture(scope="module")
def fsre_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("fsre")
    cfg = config(tmp)
    assert main(["fsre", "--config", cfg, "--out", str(tmp / "a")]) == 0
    return tmp, cfg


class TestFSRE:
    def test_report(self, fsre_run):
        tmp, _ = fsre_run
        report = json.loads((tmp / "a" / "report.json").read_text())
        runs = report["cross_validation"]["runs"]
        assert len(runs) == 10
        assert all(0 <= r["accuracy"] <= 1 for r in runs)
        assert report["final_model"]["n_rules"] >= 3
        timing = json.loads((tmp / "a" / "timing.json").read_text())
        assert set(timing["final_model"]) == {"feature-selection", "rule-extraction", "fine-tuning"}

    def test_gate_trajectories(self, fsre_run):
        tmp, _ = fsre_run
        names, hist = read_gate_history(tmp / "a" / "gates_fs.csv")
        assert len(names) == 4 and hist.shape == (20, 4)
        names, hist = read_gate_history(tmp / "a" / "gates_re.csv")
        assert hist.shape[0] == 20 and len(names) == hist.shape[1]

    def test_rerun_is_byte_identical(self, fsre_run):
        tmp, cfg = fsre_run
        assert main(["fsre", "--config", cfg, "--out", str(tmp / "b")]) == 0
        for name in ("report.json", "model.json", "gates_fs.csv", "gates_re.csv"):
            assert (tmp / "a" / name).read_bytes() == (tmp / "b" / name).read_bytes(), name

    def test_seed_flag(self, tmp_path):
        cfg = config(tmp_path, FAST.replace("folds = 10", "folds = 3"))
        assert main(["fsre", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "o")]) == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["config"]["train"]["seed"] == 7

    def test_unwritable_output(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        rc = main(["fsre", "--config", config(tmp_path), "--out", str(blocker / "sub")])
        assert rc == 2
        assert "not writable" in capsys.readouterr().err


class TestUsageErrors:
    def test_missing_config(self, tmp_path):
        assert main(["fsre", "--config", str(tmp_path / "nope.cfg")]) == 2

    @pytest.mark.parametrize("line", ["colour = blue", "tnorm = min", "eta = fast",
                                      "gate_kind = tanh", "dataset = bundled:mnist"])
    def test_bad_values(self, tmp_path, line):
        assert main(["fsre", "--config", config(tmp_path, FAST + line + "\n")]) == 2

    def test_missing_dataset_file(self, tmp_path):
        assert main(["fsre", "--config", config(tmp_path, "dataset = missing.csv\n")]) == 2

    def test_bad_arguments(self):
        assert main(["train"]) == 2

    def test_malformed_data(self, tmp_path):
        (tmp_path / "bad.csv").write_text("x,class\nabc,a\n")
        assert main(["fsre", "--config", config(tmp_path, "dataset = bad.csv\n")]) == 2


def test_parse_config():
    cfg = parse_config("dataset = bundled:wine\nfine_tune_mode = LSE\nbatch_size = none\n"
                       "threshold_on_abs = false\ngate_demo_runs = proposed@0.02, sigmoid@0.1\n")
    assert cfg.train.fine_tune_mode == "LSE" and cfg.train.batch_size is None
    assert cfg.train.threshold_on_abs is False
    assert cfg.gate_demo_runs == (("proposed", 0.02), ("sigmoid", 0.1))


class TestCompareTnorms:
    def test_iris(self, tmp_path):
        cfg = config(tmp_path, FAST.replace("folds = 10", "folds = 3"))
        assert main(["compare-tnorms", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
        rep = json.loads((tmp_path / "o" / "tnorm_report.json").read_text())
        assert {k: v["status"] for k, v in rep["results"].items()} == {
            "product": "ok", "softmin": "ok", "ada-softmin": "ok"}
        assert rep["probes"]["fake_minimum"]["softmin_q-12"] == pytest.approx(0.4977, abs=5e-4)
        assert rep["probes"]["underflow"]["softmin_q-12"] == 0.0

    def test_high_dimensional_failure_is_data(self, tmp_path):
        save_csv(make_high_dim_dataset(n_features=2000, seed=1), tmp_path / "syn.csv")
        text = "dataset = syn.csv\nnormalization = zscore\nfolds = 2\neta = 0.001\n"
        assert main(["compare-tnorms", "--config", config(tmp_path, text),
                     "--out", str(tmp_path / "o")]) == 0
        res = json.loads((tmp_path / "o" / "tnorm_report.json").read_text())["results"]
        assert res["product"] == {"status": "failed", "failure": "underflow",
                                  "detail": res["product"]["detail"]}
        assert res["ada-softmin"]["status"] == "ok"
        assert 0 <= res["ada-softmin"]["mean_accuracy"] <= 1


def test_gate_demo(tmp_path):
    cfg = config(tmp_path, "dataset = bundled:wine\n")
    for out in ("a", "b"):
        assert main(["gate-demo", "--config", cfg, "--out", str(tmp_path / out)]) == 0
    summary = json.loads((tmp_path / "a" / "gate_demo.json").read_text())["runs"]
    assert [(r["gate"], r["eta"]) for r in summary] == [("proposed", 0.01), ("exp-sq", 0.01),
                                                        ("exp-sq", 0.05)]
    for r in summary:
        names, hist = read_gate_history(tmp_path / "a" / r["file"])
        assert hist.shape == (1000, 13) and len(names) == 13
        assert (tmp_path / "a" / r["file"]).read_bytes() == (tmp_path / "b" / r["file"]).read_bytes()
    assert summary[0]["final_spread"] > summary[1]["final_spread"]


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("predict")
    save_csv(load_bundled("iris"), tmp / "iris.csv")
    cfg = config(tmp, FAST.replace("bundled:iris", "iris.csv").replace("folds = 10", "folds = 0"))
    assert main(["fsre", "--config", cfg, "--out", str(tmp / "o")]) == 0
    return tmp


class TestPredict:
    def test_self_consistency(self, trained):
        tmp = trained
        assert main(["predict", "--model", str(tmp / "o" / "model.json"),
                     "--input", str(tmp / "iris.csv"), "--out", str(tmp / "p")]) == 0
        with open(tmp / "p" / "predictions.csv", newline="") as fh:
            pred = [row[0] for row in csv.reader(fh)][1:]
        truth = [load_bundled("iris").label_names[k] for k in load_bundled("iris").labels]
        acc = np.mean([a == b for a, b in zip(pred, truth)])
        report = json.loads((tmp / "o" / "report.json").read_text())
        assert len(pred) == 150
        assert acc == report["final_model"]["train_accuracy"]

    def test_empty_input(self, trained, tmp_path, capsys):
        (tmp_path / "empty.csv").write_text("")
        assert main(["predict", "--model", str(trained / "o" / "model.json"),
                     "--input", str(tmp_path / "empty.csv")]) == 0
        assert capsys.readouterr().out.splitlines()[1:] == []

    def test_missing_column(self, trained, tmp_path, capsys):
        model = json.loads((trained / "o" / "model.json").read_text())
        missing = model["selected_feature_names"][0]
        (tmp_path / "x.csv").write_text("unrelated\n1.0\n")
        rc = main(["predict", "--model", str(trained / "o" / "model.json"),
                   "--input", str(tmp_path / "x.csv")])
        assert rc == 2
        assert missing in capsys.readouterr().err


def test_model_round_trip(tmp_path):
    ds = load_bundled("wine")
    clf = run_pipeline(ds, TrainConfig(eta=0.1, iterations_fs=30, iterations_re=30, iterations_ft=30))
    save_model(clf, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    probe = np.random.default_rng(0).uniform(ds.features.min(0), ds.features.max(0), size=(50, 13))
    np.testing.assert_array_equal(back.predict(probe), clf.predict(probe))
    np.testing.assert_array_equal(back.model.decision_function(minmax_normalize(probe, back.stats)),
                                  clf.model.decision_function(minmax_normalize(probe, clf.stats)))
    assert model_to_dict(model_from_dict(model_to_dict(clf))) == model_to_dict(clf)
