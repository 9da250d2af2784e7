import csv
import json

import numpy as np
import pytest

from subanneal.cli import main


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def data_csv(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("rows = 120\nfeatures = 3\nreal_features = 1\n")
    out = tmp_path / "data.csv"
    assert main(["synth", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    return out


def test_synth_writes_data_and_labels(data_csv):
    rows = read_rows(data_csv)
    assert len(rows) == 120 and list(rows[0]) == ["c0", "c1", "x2"]
    labels = read_rows(data_csv.with_name("data.labels.csv"))
    assert len(labels) == 120


def test_fit_writes_state(data_csv, tmp_path):
    out = tmp_path / "state.json"
    assert main(["fit", "--data", str(data_csv), "--strategy", "anneal", "--budget-assigns", "300",
                 "--seed", "1", "--out", str(out)]) == 0
    state = json.loads(out.read_text())
    assert len(state["labels"]) == 105 and min(state["labels"]) >= 0
    assert state["manifest"]["schedule"]["churn"] == pytest.approx((300 - 105) / 105)
    assert np.isfinite(state["heldout_log_score"])
    again = tmp_path / "again.json"
    main(["fit", "--data", str(data_csv), "--strategy", "anneal", "--budget-assigns", "300",
          "--seed", "1", "--out", str(again)])
    assert json.loads(again.read_text())["heldout_log_score"] == state["heldout_log_score"]


def test_fit_wall_clock(data_csv, tmp_path):
    out = tmp_path / "state.json"
    assert main(["fit", "--data", str(data_csv), "--strategy", "seq-gibbs", "--budget-secs", "0.2",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["wall_secs"] < 5


def test_bench_writes_csv_and_json(data_csv, tmp_path):
    out = tmp_path / "results.csv"
    assert main(["bench", "--data", str(data_csv), "--budget-assigns", "150,300", "--chains", "2",
                 "--seed", "4", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 3 * 2 * 2
    assert list(rows[0]) == ["dataset", "strategy", "budget", "chain", "raw_score", "norm_score", "wall_secs",
                             "assigns"]
    summary = json.loads(out.with_suffix(".json").read_text())
    assert len(summary["cells"]) == 6


def test_toy_urns_outputs(tmp_path):
    out = tmp_path / "urns"
    assert main(["toy-urns", "--red", "8", "--blue", "12", "--chains", "500", "--bins", "4",
                 "--strategies", "prior+gibbs,anneal-subsample", "--out", str(out)]) == 0
    tvd = read_rows(out / "tvd.csv")
    assert [r["strategy"] for r in tvd] == ["prior+gibbs", "anneal-subsample"]
    exact = read_rows(out / "exact_posterior.csv")
    assert len(exact) == 9 * 13
    assert sum(float(r["prob"]) for r in exact) == pytest.approx(1.0)
    summary = json.loads((out / "tvd.json").read_text())
    assert set(summary["tvd"]) == {"prior+gibbs", "anneal-subsample"}
    assert len(read_rows(out / "histograms.csv")) == 3 * 16


def test_toy_bimodal_sweep(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("gamma = 1\ndelta = 0.5, 1\nn = 40\neps = 0.05\n")
    out = tmp_path / "bimodal.csv"
    assert main(["toy-bimodal", "--sweep", str(cfg), "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 2
    assert all(float(r["tvd_at_bound"]) <= 0.05 for r in rows)


def test_schedule_dump(tmp_path):
    out = tmp_path / "sched.csv"
    assert main(["schedule-dump", "--strategy", "anneal", "--n", "5", "--t", "2", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert list(rows[0]) == ["step", "action", "subsample_size"]
    assert rows[-1]["subsample_size"] == "5"
    assert sum(r["action"] == "assign" for r in rows) == 15


def test_bad_arguments_exit():
    with pytest.raises(SystemExit):
        main(["fit", "--data", "x.csv", "--out", "y.json"])
