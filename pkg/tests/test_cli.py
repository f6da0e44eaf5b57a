import json

import pytest

from lionet.cli import main
from lionet.models import LIONetConfig, build_lionet, lionet_param_formula, save
from lionet.pipeline import read_trajectory_csv
from lionet.synth import SynthSpec, still, synth, write_imu_csv

CORPUS = {"corpus": {"n_sequences": 3, "duration": 8.0, "trolley_fraction": 0.34}}
TRAIN_CFG = {"model": {"filters": 4}, "train": {"lr": 1e-3, "batch_size": 16, "epochs": 2}}


def _json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--spec", _json(d / "spec.json", CORPUS), "--out", str(d / "data"), "--seed", "5"]) == 0
    return d


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_synth_writes_manifest_and_is_reproducible(corpus, tmp_path):
    data = corpus / "data"
    assert {"manifest.json", "specs.json", "imu_000.csv", "gt_002.csv"} <= set(_files(data))
    assert main(["synth", "--spec", str(corpus / "spec.json"), "--out", str(tmp_path / "again"), "--seed", "5"]) == 0
    assert _files(tmp_path / "again") == _files(data)


def test_synth_single_spec(tmp_path):
    spec = SynthSpec(3.0, (still(3.0),)).to_dict()
    assert main(["synth", "--spec", _json(tmp_path / "s.json", spec), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "imu_000.csv").is_file()


def test_train_reproducible_and_inspect(corpus, tmp_path, capsys):
    cfg = _json(tmp_path / "cfg.json", TRAIN_CFG)
    manifest = str(corpus / "data" / "manifest.json")
    for name in ("a", "b"):
        assert main(["train", "--model", "lionet", "--config", cfg, "--data", manifest,
                     "--out", str(tmp_path / f"{name}.bin"), "--seed", "1"]) == 0
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
    assert (tmp_path / "a.history.csv").read_bytes() == (tmp_path / "b.history.csv").read_bytes()

    capsys.readouterr()
    assert main(["inspect", "--model", str(tmp_path / "a.bin")]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["params"] == lionet_param_formula(LIONetConfig(4)) and info["norm_stats"]["checksum"]

    report = tmp_path / "eval.json"
    assert main(["eval", "--model", str(tmp_path / "a.bin"), "--data", manifest, "--report", str(report)]) == 0
    r = json.loads(report.read_text())
    assert r["polar_mse"] > 0 and r["sequences"]


def test_train_ionet(corpus, tmp_path):
    cfg = _json(tmp_path / "cfg.json", {"model": {"cell": "gru", "hidden": 4}, "train": {"lr": 1e-3, "epochs": 1}})
    assert main(["train", "--model", "ionet", "--config", cfg, "--data", str(corpus / "data" / "manifest.json"),
                 "--out", str(tmp_path / "io.bin")]) == 0


def test_eval_passthrough_closes(corpus, tmp_path):
    out = tmp_path / "r.json"
    assert main(["eval", "--passthrough", "--all", "--data", str(corpus / "data" / "manifest.json"),
                 "--report", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["polar_mse"] == 0.0 and r["ate_rmse_max"] < 1e-9 and len(r["sequences"]) == 3


def test_track_pdr_still_single_pose(tmp_path):
    imu, _ = synth(SynthSpec(5.0, (still(5.0),)))
    write_imu_csv(imu, tmp_path / "imu.csv")
    assert main(["track", "--method", "pdr", "--input", str(tmp_path / "imu.csv"), "--init", "1,2,0.5",
                 "--out", str(tmp_path / "t.csv")]) == 0
    tr = read_trajectory_csv(tmp_path / "t.csv")
    assert len(tr) == 1 and (tr.x[0], tr.y[0], tr.psi[0]) == (1.0, 2.0, 0.5)


def test_track_lionet(corpus, tmp_path):
    m = build_lionet(LIONetConfig(4), zero_head=True)
    m.head.b.value[0] = 0.5
    save(m, tmp_path / "m.bin")
    assert main(["track", "--method", "lionet", "--model", str(tmp_path / "m.bin"), "--no-smooth",
                 "--input", str(corpus / "data" / "imu_001.csv"), "--out", str(tmp_path / "t.json")]) == 0
    tr = json.loads((tmp_path / "t.json").read_text())
    # 801 frames -> 61 windows plus the initial pose; the last window's
    # chain (starts 0, 200, 400, 600) has taken four 0.5 m steps along x
    assert len(tr["x"]) == 62
    assert tr["x"][-1] == pytest.approx(2.0)
    assert tr["y"][-1] == pytest.approx(0.0, abs=1e-12)
    assert main(["track", "--method", "ionet", "--model", str(tmp_path / "m.bin"),
                 "--input", str(corpus / "data" / "imu_001.csv"), "--out", str(tmp_path / "u.csv")]) == 2


def test_bench_report_and_models_untouched(tmp_path, capsys):
    paths = []
    for f in (8, 4):
        p = tmp_path / f"m{f}.bin"
        save(build_lionet(LIONetConfig(f)), p)
        paths.append(p)
    before = [p.read_bytes() for p in paths]
    out = tmp_path / "bench.json"
    assert main(["bench", "--models", ",".join(map(str, paths)), "--report", str(out),
                 "--iters", "5", "--warmup", "1", "--csv", str(tmp_path / "t.csv")]) == 0
    r = json.loads(out.read_text())
    assert [x["model"] for x in r["reports"]] == ["L-IONet(8)", "L-IONet(4)"]
    assert "L-IONet(8)" in capsys.readouterr().out
    assert [p.read_bytes() for p in paths] == before


@pytest.mark.parametrize("argv", [[], ["train", "--model", "cnn"], ["track", "--method", "pdr"], ["nope"]])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_data_errors(tmp_path):
    assert main(["inspect", "--model", str(tmp_path / "missing.bin")]) == 2
    (tmp_path / "bad.bin").write_bytes(b"junk")
    assert main(["inspect", "--model", str(tmp_path / "bad.bin")]) == 2
    assert main(["eval", "--passthrough", "--data", str(tmp_path / "none.json")]) == 2


def test_numeric_failure_exit_code(corpus, tmp_path):
    cfg = _json(tmp_path / "cfg.json", {"model": {"filters": 4}, "train": {"lr": 1e300, "epochs": 3}})
    assert main(["train", "--model", "lionet", "--config", cfg, "--data", str(corpus / "data" / "manifest.json"),
                 "--out", str(tmp_path / "x.bin")]) == 3
