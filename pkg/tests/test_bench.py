import json

import numpy as np
import pytest

from lionet.bench import CompareRow, LatencyReport, compare, render_table, time_inference, write_rows
from lionet.dataio import LabeledDataset, fit_norm
from lionet.models import IONetConfig, LIONetConfig, build_ionet, build_lionet
from lionet.types import WindowConfig


def test_single_iteration_report():
    r = time_inference(build_lionet(LIONetConfig(4)), warmup=0, iters=1)
    assert len(r.samples_ms) == 1 and r.median_ms == r.samples_ms[0] == r.p10_ms == r.p90_ms
    assert r.threads == 1 and r.host


def test_report_quantiles_ordered_and_json(tmp_path):
    r = time_inference(build_lionet(LIONetConfig(4)), warmup=2, iters=20)
    assert r.p10_ms <= r.median_ms <= r.p90_ms and r.iters == 20
    r.write_json(tmp_path / "r.json")
    assert json.loads((tmp_path / "r.json").read_text())["median_ms"] == r.median_ms
    with pytest.raises(ValueError):
        LatencyReport("m", 1, "float64", 1, 0, 1, (1.0,), 2.0, 3.0, 1.0, 2.0)


def test_repeated_medians_stable():
    m = build_lionet(LIONetConfig(16))
    a = time_inference(m).median_ms
    b = time_inference(m).median_ms
    assert abs(a - b) <= 0.25 * min(a, b)


def test_compare_single_model():
    rows = compare([build_lionet(LIONetConfig(4))], warmup=0, iters=3)
    assert len(rows) == 1 and rows[0].model == "L-IONet(4)" and rows[0].val_mse is None


def test_roster_param_ordering():
    roster = [build_lionet(LIONetConfig(32)), build_lionet(LIONetConfig(16)),
              build_ionet(IONetConfig("lstm", 1, 128, True)), build_ionet(IONetConfig("lstm", 1, 64)),
              build_ionet(IONetConfig("gru", 1, 64)), build_ionet(IONetConfig("rnn", 1, 64))]
    rows = compare(roster, warmup=0, iters=1)
    assert len(rows) == 6
    params = {r.model: r.params for r in rows}
    assert params["IONet 1-layer RNN(64)"] < params["IONet 1-layer GRU(64)"] < params["IONet 1-layer LSTM(64)"]
    # recurrent part scales with the gate count 1 : 3 : 4
    rec = {k: params[f"IONet 1-layer {k}(64)"] - (64 * 2 + 2) for k in ("RNN", "GRU", "LSTM")}
    assert rec["GRU"] == 3 * rec["RNN"] and rec["LSTM"] == 4 * rec["RNN"]


def test_compare_sorts_by_mse_and_skips_mismatched_stats():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 200, 6))
    stats = fit_norm(X)
    ds = LabeledDataset(X, np.tile([1.0, 0.0], (6, 1)), stats, WindowConfig())
    good = build_lionet(LIONetConfig(4), zero_head=True)
    good.head.b.value[0] = 1.0  # exact predictor
    worse = build_lionet(LIONetConfig(4), zero_head=True)
    other = build_lionet(LIONetConfig(8))
    other.norm_stats = fit_norm(X + 3.0)
    skipped = []
    rows = compare([worse, other, good], ds, warmup=0, iters=1, skipped=skipped)
    assert [r.val_mse for r in rows] == [0.0, 0.5]
    assert len(skipped) == 1 and skipped[0][0] == "L-IONet(8)"


def test_write_rows_csv_and_json(tmp_path):
    rows = [CompareRow("a", 10, 1.5, 0.1), CompareRow("b", 20, 2.5, None)]
    write_rows(rows, tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "model,params,median_ms,val_mse"
    write_rows(rows, tmp_path / "t.json")
    assert len(json.loads((tmp_path / "t.json").read_text())["rows"]) == 2
    assert "a" in render_table(rows)


def test_desk_roster_vanilla_rnn_worst(desk_split, desk_model):
    from lionet.models import TrainConfig, train

    train_set, val_set = desk_split
    budget = TrainConfig(lr=2e-3, batch_size=32, epochs=3, seed=0)
    roster = [desk_model[0]]
    for cell in ("rnn", "gru", "lstm"):
        model, _ = train(build_ionet(IONetConfig(cell, 1, 64)), train_set, val_set, budget)
        roster.append(model)
    rows = compare(roster, val_set, warmup=1, iters=3)
    assert rows[-1].model == "IONet 1-layer RNN(64)", [(r.model, r.val_mse) for r in rows]
