import csv
import hashlib
import json

import numpy as np
import pytest

from sigmdn import cli
from sigmdn import rng as streams
from sigmdn.mdn import PlateauScheduler, init_params, load_model

TOY = {
    "regime": "tv",
    "maturity_law": {"kind": "fixed", "value": 0.1},
    "dataset": {"n1": 3, "n2": 20, "M": 5, "validation_n1": 2},
    "mdn": {"hidden_sizes": [8, 8], "n_components": 2},
    "train": {"batch_size": 20, "epochs": 12, "patience": 1, "min_delta": 0.05, "learning_rate": 0.01},
    "evaluation": {"maturities": [0.05, 0.1]},
    "seeds": {"data": 1, "train": 2, "eval": 3},
}


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_history(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(c) for c in r] for r in rows[1:]]


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "toy.json").write_text(json.dumps(TOY))
    assert cli.main(["gen-data", "--config", str(d / "toy.json"), "--out", str(d / "toy.bin")]) == 0
    assert cli.main(["train", "--config", str(d / "toy.json"), "--data", str(d / "toy.bin"), "--out", str(d / "m.smdn")]) == 0
    assert cli.main(["make-scenario", "--config", str(d / "toy.json"), "--out", str(d / "s.json"), "--horizon", "0.1"]) == 0
    return d


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestGenData:
    def test_outputs(self, work, capsys):
        assert (work / "toy.bin.json").exists() and (work / "toy.bin.val").exists()
        man = json.loads((work / "toy.bin.json").read_text())
        assert man["records"] == 60 and man["seed"] == 1

    def test_prints_counts(self, work, tmp_path, capsys):
        assert run("gen-data", "--config", work / "toy.json", "--out", tmp_path / "a.bin") == 0
        out = capsys.readouterr().out.split()
        assert out[:4] == ["records", "60", "validation_records", "40"]
        assert out[4] == "wall_time_s"

    def test_deterministic_across_threads(self, work, tmp_path):
        assert run("gen-data", "--config", work / "toy.json", "--out", tmp_path / "b.bin", "--threads", 3) == 0
        assert digest(tmp_path / "b.bin") == digest(work / "toy.bin")
        assert digest(tmp_path / "b.bin.val") == digest(work / "toy.bin.val")

    def test_missing_field(self, tmp_path, capsys):
        (tmp_path / "c.json").write_text(json.dumps({"dataset": {"n1": 1}}))
        assert run("gen-data", "--config", tmp_path / "c.json", "--out", tmp_path / "x.bin") == cli.EXIT_CONFIG
        assert "regime" in capsys.readouterr().err

    def test_unknown_field(self, tmp_path, capsys):
        (tmp_path / "c.json").write_text(json.dumps({"regime": "tv", "dataset": {"m": 1}}))
        assert run("gen-data", "--config", tmp_path / "c.json", "--out", tmp_path / "x.bin") == cli.EXIT_CONFIG
        assert "dataset.m" in capsys.readouterr().err


class TestTrain:
    def test_history_columns(self, work):
        header, rows = read_history(work / "m.smdn.history.csv")
        assert header == ["epoch", "train_nll", "val_nll", "lr"]
        assert [int(r[0]) for r in rows] == list(range(1, len(rows) + 1))

    def test_scheduler_trace(self, work):
        # Replaying the recorded validation losses through the schedule must
        # give back the recorded learning rates, reductions included.
        _, rows = read_history(work / "m.smdn.history.csv")
        tc = TOY["train"]
        s = PlateauScheduler(tc["learning_rate"], 0.5, tc["patience"], tc["min_delta"], 1e-5)
        for epoch, _, val, lr in rows:
            assert lr == s.lr
            s.step(val, int(epoch))
        assert s.reductions, "toy run should hit at least one plateau"
        lrs = [r[3] for r in rows]
        assert all(b in (a, a * 0.5) for a, b in zip(lrs, lrs[1:]))

    def test_zero_epochs(self, work, tmp_path):
        out = tmp_path / "z.smdn"
        assert run("train", "--config", work / "toy.json", "--data", work / "toy.bin", "--out", out, "--epochs", 0) == 0
        header, rows = read_history(str(out) + ".history.csv")
        assert rows == []
        model = load_model(out)
        init = init_params(model.config, streams.stream(TOY["seeds"]["train"], streams.INIT))
        assert model.params == init

    def test_resume_reproduces_next_epoch(self, work, tmp_path):
        a = tmp_path / "a.smdn"
        b = tmp_path / "b.smdn"
        base = ["train", "--config", work / "toy.json", "--data", work / "toy.bin"]
        assert run(*base, "--out", a, "--epochs", 4) == 0
        assert run(*base, "--out", b, "--epochs", 5, "--resume", str(a) + ".ckpt") == 0
        _, resumed = read_history(str(b) + ".history.csv")
        _, full = read_history(work / "m.smdn.history.csv")
        assert resumed == full[:5]

    def test_repeatable(self, work, tmp_path):
        out = tmp_path / "r.smdn"
        assert run("train", "--config", work / "toy.json", "--data", work / "toy.bin", "--out", out) == 0
        assert digest(out) == digest(work / "m.smdn")
        assert digest(tmp_path / "r.smdn.history.csv") == digest(work / "m.smdn.history.csv")

    def test_truncated_dataset(self, work, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes((work / "toy.bin").read_bytes()[:-3])
        code = run("train", "--config", work / "toy.json", "--data", bad, "--out", tmp_path / "x.smdn")
        assert code == cli.EXIT_FORMAT

    def test_regime_mismatch(self, work, tmp_path):
        (tmp_path / "lv.json").write_text(json.dumps(dict(TOY, regime="lv")))
        code = run("train", "--config", tmp_path / "lv.json", "--data", work / "toy.bin", "--out", tmp_path / "x.smdn")
        assert code == cli.EXIT_CONFIG


class TestPrice:
    def test_table(self, work, capsys):
        assert run("price", "--model", work / "m.smdn", "--scenario", work / "s.json") == 0
        rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
        assert len(rows) == 2 * 21 * 2
        assert set(rows[0]) == {"scenario_id", "maturity", "strike", "kind", "method", "price", "stderr", "relative_error"}
        assert all(float(r["price"]) >= 0 for r in rows)

    def test_single_kind_and_list(self, work, tmp_path):
        out = tmp_path / "p.csv"
        args = ("price", "--model", work / "m.smdn", "--scenario", work / "s.json")
        assert run(*args, "--kind", "call", "--strikes", "0.9,1.0,1.1", "--out", out) == 0
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 2 * 3 and {r["kind"] for r in rows} == {"call"}

    @pytest.mark.parametrize("strikes", ["0", "0.9,0,1.1", "abc"])
    def test_bad_strikes(self, work, strikes):
        args = ("price", "--model", work / "m.smdn", "--scenario", work / "s.json", "--strikes", strikes)
        assert run(*args) == cli.EXIT_CONFIG

    def test_missing_scenario(self, work, tmp_path):
        assert run("price", "--model", work / "m.smdn", "--scenario", tmp_path / "none.json") == cli.EXIT_CONFIG

    def test_bad_model_file(self, work, tmp_path):
        (tmp_path / "m.smdn").write_bytes(b"junk")
        assert run("price", "--model", tmp_path / "m.smdn", "--scenario", work / "s.json") == cli.EXIT_FORMAT


class TestEvaluate:
    def test_report_and_warning(self, work, tmp_path, capsys):
        args = ("evaluate", "--model", work / "m.smdn", "--scenario", work / "s.json", "--mc-paths", 500, "--seed", 9)
        assert run(*args, "--out", tmp_path / "a") == 0
        assert "warning" in capsys.readouterr().err
        doc = json.loads((tmp_path / "a.json").read_text())
        assert [m["maturity"] for m in doc["kl_by_maturity"]] == [0.05, 0.1]
        assert all(np.isfinite(m["kl"]) for m in doc["kl_by_maturity"])
        assert any("500" in w for w in doc["warnings"])
        rows = list(csv.DictReader((tmp_path / "a.csv").read_text().splitlines()))
        assert {r["method"] for r in rows} == {"monte-carlo", "mixture-closed-form"}

    def test_identical_reports(self, work, tmp_path):
        args = ("evaluate", "--model", work / "m.smdn", "--scenario", work / "s.json", "--mc-paths", 2000, "--seed", 4)
        assert run(*args, "--out", tmp_path / "a") == 0
        assert run(*args, "--out", tmp_path / "b") == 0
        assert digest(tmp_path / "a.json") == digest(tmp_path / "b.json")
        assert digest(tmp_path / "a.csv") == digest(tmp_path / "b.csv")
        doc = json.loads((tmp_path / "a.json").read_text())
        assert doc["warnings"] == []

    def test_too_few_paths(self, work):
        args = ("evaluate", "--model", work / "m.smdn", "--scenario", work / "s.json", "--mc-paths", 10)
        assert run(*args) == cli.EXIT_CONFIG


class TestInitConfig:
    def test_round_trips_through_gen_data_parser(self, tmp_path):
        assert run("init-config", "--regime", "lv", "--out", tmp_path / "c.json") == 0
        doc = json.loads((tmp_path / "c.json").read_text())
        assert doc["regime"] == "lv" and doc["dataset"]["M"] == 30
