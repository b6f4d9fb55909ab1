import json

import numpy as np
import pytest

from celltide import cdr
from celltide.cli import main

T0 = 1_383_260_400_000


def make_series_csv(tmp_path, days=4, seed=1, name="series.csv"):
    path = tmp_path / name
    assert main(["synth", "--days", str(days), "--seed", str(seed),
                 "--out", str(path)]) == 0
    return path


def make_raw_dir(tmp_path, n_slots=10):
    raw = tmp_path / "raw"
    raw.mkdir()
    rng = np.random.default_rng(0)
    half = n_slots // 2
    for day, lo in enumerate((0, half)):
        with open(raw / f"day{day}.txt", "w") as fh:
            for slot in range(lo, lo + half):
                ts = T0 + slot * 600_000
                fh.write(f"1\t{ts}\t39\t\t\t\t\t{rng.uniform(1, 9):.3f}\n")
    return raw


class TestSynth:
    def test_row_count_and_nonnegative(self, tmp_path):
        path = make_series_csv(tmp_path, days=4)
        series = cdr.read_series_csv(str(path))
        assert len(series) == 576
        assert np.all(series.values >= 0)

    def test_same_seed_same_bytes(self, tmp_path):
        a = make_series_csv(tmp_path, seed=9, name="a.csv")
        b = make_series_csv(tmp_path, seed=9, name="b.csv")
        assert a.read_bytes() == b.read_bytes()


class TestIngest:
    def test_reports_slot_count(self, tmp_path, capsys):
        raw = make_raw_dir(tmp_path)
        out = tmp_path / "series.csv"
        assert main(["ingest", "--input-dir", str(raw), "--grid", "1",
                     "--out", str(out)]) == 0
        assert "10 slots" in capsys.readouterr().out
        assert len(cdr.read_series_csv(str(out))) == 10

    def test_unknown_channel_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["ingest", "--input-dir", str(tmp_path), "--channel", "pigeon",
                  "--out", str(tmp_path / "x.csv")])
        assert exc.value.code == 2

    def test_empty_dir_fails(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["ingest", "--input-dir", str(empty),
                     "--out", str(tmp_path / "x.csv")]) == 1
        assert "error" in capsys.readouterr().err


class TestTrain:
    def test_writes_model_and_history(self, tmp_path, capsys):
        series = make_series_csv(tmp_path)
        model = tmp_path / "model.json"
        history = tmp_path / "history.csv"
        rc = main(["train", "--model", "ffnn", "--series", str(series),
                   "--train-frac", "0.4", "--epochs", "3", "--seed", "1",
                   "--out-model", str(model), "--out-history", str(history)])
        assert rc == 0
        assert "split 230/58/58" in capsys.readouterr().out
        assert json.loads(model.read_text())["type"] == "ffnn"
        lines = history.read_text().strip().splitlines()
        assert lines[0] == "epoch,train_mae,val_mae,wall_ms"
        assert len(lines) == 4

    def test_same_seed_same_model(self, tmp_path):
        series = make_series_csv(tmp_path)
        models = []
        for name in ("m1.json", "m2.json"):
            main(["train", "--model", "lstm", "--series", str(series),
                  "--train-frac", "0.4", "--epochs", "1", "--seed", "7",
                  "--out-model", str(tmp_path / name),
                  "--out-history", str(tmp_path / f"{name}.csv")])
            models.append((tmp_path / name).read_bytes())
        assert models[0] == models[1]

    def test_bad_fraction_fails(self, tmp_path):
        series = make_series_csv(tmp_path)
        assert main(["train", "--model", "ffnn", "--series", str(series),
                     "--train-frac", "0.99", "--epochs", "1",
                     "--out-model", str(tmp_path / "m.json"),
                     "--out-history", str(tmp_path / "h.csv")]) == 1


class TestArima:
    def test_mean_model_constant_predictions(self, tmp_path):
        series = make_series_csv(tmp_path)
        preds_path = tmp_path / "preds.csv"
        rc = main(["arima", "--series", str(series), "--train-frac", "0.4",
                   "--p", "0", "--d", "0", "--q", "0",
                   "--out-model", str(tmp_path / "arima.json"),
                   "--out-predictions", str(preds_path)])
        assert rc == 0
        rows = preds_path.read_text().strip().splitlines()[1:]
        assert len(rows) == 58
        preds = {row.split(",")[2] for row in rows}
        assert len(preds) == 1

    def test_model_json_schema(self, tmp_path):
        series = make_series_csv(tmp_path)
        model_path = tmp_path / "arima.json"
        main(["arima", "--series", str(series), "--train-frac", "0.4",
              "--p", "1", "--d", "0", "--q", "0",
              "--out-model", str(model_path),
              "--out-predictions", str(tmp_path / "p.csv")])
        obj = json.loads(model_path.read_text())
        assert obj["type"] == "arima"
        assert (obj["p"], obj["d"], obj["q"]) == (1, 0, 0)
        assert len(obj["phi"]) == 1


class TestCompare:
    def test_output_contract(self, tmp_path):
        series = make_series_csv(tmp_path, days=4)
        out_dir = tmp_path / "out"
        rc = main(["compare", "--series", str(series), "--train-frac", "0.4",
                   "--epochs", "1", "--seed", "3", "--p", "1",
                   "--out-dir", str(out_dir)])
        assert rc == 0
        expected = {"lstm_history.csv", "ffnn_history.csv", "lstm_predictions.csv",
                    "ffnn_predictions.csv", "arima_predictions.csv", "report.json"}
        assert {p.name for p in out_dir.iterdir()} == expected
        report = json.loads((out_dir / "report.json").read_text())
        assert report["seed"] == 3
        assert set(report["models"]) == {"lstm", "ffnn", "arima"}
        assert all(m["test_mae"] >= 0 for m in report["models"].values())

    def test_failure_removes_partial_outputs(self, tmp_path):
        series = make_series_csv(tmp_path, days=4)
        out_dir = tmp_path / "out"
        # ARIMA order above the supported ceiling fails after the NN steps
        rc = main(["compare", "--series", str(series), "--train-frac", "0.4",
                   "--epochs", "1", "--seed", "3", "--p", "9",
                   "--out-dir", str(out_dir)])
        assert rc == 1
        assert list(out_dir.iterdir()) == []
