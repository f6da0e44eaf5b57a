import json
import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lionet.dataio import (
    AlignedGroundTruth,
    ColumnMap,
    GroundTruth,
    LabeledDataset,
    Manifest,
    NormStats,
    align,
    apply_norm,
    build_dataset,
    chain_anchors,
    fit_norm,
    load_gt_csv,
    load_imu_csv,
    make_labels,
    motion_heading,
    normalize,
    quat_yaw,
    split,
    yaw_quat,
)
from lionet.errors import DataError
from lionet.synth import SynthSpec, still, synth, walking
from lionet.types import GRAVITY, ImuSequence, Window, WindowConfig

IMU_HEADER = "t,ax,ay,az,gx,gy,gz\n"
GT_HEADER = "t,x,y,z,qw,qx,qy,qz\n"


def _write(path, header, rows):
    path.write_text(header + "".join(",".join(str(v) for v in r) + "\n" for r in rows))
    return path


def _imu(n, rate=100.0):
    t = np.arange(n) / rate
    return ImuSequence(t, np.zeros((n, 3)), np.zeros((n, 3)), nominal_rate=rate)


def _aligned(positions, rate=100.0):
    n = len(positions)
    pos = np.column_stack([positions, np.zeros(n)]) if positions.shape[1] == 2 else positions
    return AlignedGroundTruth(_imu(n, rate), pos, yaw_quat(np.zeros(n)))


# --------------------------------------------------------------------------
# CSV loading


def test_load_imu_three_rows(tmp_path):
    p = _write(tmp_path / "imu.csv", IMU_HEADER, [[0.00, 0, 0, 9.8, 0, 0, 0.1],
                                                 [0.01, 0, 0, 9.8, 0, 0, 0.1],
                                                 [0.02, 0, 0, 9.8, 0, 0, 0.1]])
    seq = load_imu_csv(p)
    assert len(seq) == 3 and seq.nominal_rate == 100
    np.testing.assert_allclose(seq.gyro[:, 2], 0.1)


def test_load_imu_drops_duplicate_timestamp(tmp_path, caplog):
    p = _write(tmp_path / "imu.csv", IMU_HEADER, [[0.00, 0, 0, 9.8, 0, 0, 0],
                                                 [0.00, 1, 0, 9.8, 0, 0, 0],
                                                 [0.01, 0, 0, 9.8, 0, 0, 0]])
    report = {}
    with caplog.at_level(logging.WARNING):
        seq = load_imu_csv(p, report=report)
    assert len(seq) == 2 and report["dropped"] == 1
    assert "dropped 1" in caplog.text


def test_load_imu_malformed_row_reports_line(tmp_path):
    p = tmp_path / "imu.csv"
    p.write_text(IMU_HEADER + "0,0,0,9.8,0,0,0\n0.01,0,zz,9.8,0,0,0\n")
    with pytest.raises(DataError, match=":3"):
        load_imu_csv(p)


def test_load_imu_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_imu_csv(tmp_path / "nope.csv")


def test_column_map_scaling_and_offset(tmp_path):
    # time, 3 gravity columns (in g), 3 user-accel columns (in g), gyro
    p = _write(tmp_path / "imu.csv", "h\n", [[0.0, 0, 0, 1, 0.1, 0, 0, 0, 0, 0.5],
                                             [0.01, 0, 0, 1, 0.2, 0, 0, 0, 0, 0.5]])
    cmap = ColumnMap(accel=(4, 5, 6), accel_offset=(1, 2, 3), gyro=(7, 8, 9), accel_scale=GRAVITY)
    seq = load_imu_csv(p, cmap)
    np.testing.assert_allclose(seq.accel[1], [0.2 * GRAVITY, 0, GRAVITY])
    assert ColumnMap.from_dict(json.loads(json.dumps(cmap.to_dict()))) == cmap


def test_gt_identity_quaternion_has_zero_yaw(tmp_path):
    p = _write(tmp_path / "gt.csv", GT_HEADER, [[0, 0, 0, 0, 1, 0, 0, 0], [0.1, 1, 0, 0, 1, 0, 0, 0]])
    gt = load_gt_csv(p)
    np.testing.assert_array_equal(gt.yaw, [0.0, 0.0])


@pytest.mark.parametrize("norm, warns", [(1.0005, False), (1.01, True)])
def test_gt_quaternion_renormalised(tmp_path, caplog, norm, warns):
    p = _write(tmp_path / "gt.csv", GT_HEADER, [[0, 0, 0, 0, norm, 0, 0, 0], [0.1, 1, 0, 0, 1, 0, 0, 0]])
    with caplog.at_level(logging.WARNING):
        gt = load_gt_csv(p)
    np.testing.assert_allclose(np.linalg.norm(gt.orientation, axis=1), 1.0)
    assert ("unit norm" in caplog.text) == warns


@given(st.floats(-math.pi + 1e-6, math.pi))
def test_yaw_quat_round_trip(yaw):
    assert quat_yaw(yaw_quat(np.array([yaw])))[0] == pytest.approx(yaw, abs=1e-9)


# --------------------------------------------------------------------------
# alignment


def _gt(ts, xs):
    n = len(ts)
    return GroundTruth(ts, np.column_stack([xs, np.zeros(n), np.zeros(n)]), yaw_quat(np.zeros(n)))


def test_align_exact_and_midpoint():
    imu = ImuSequence(np.array([0.0, 0.5, 1.0]), np.zeros((3, 3)), np.zeros((3, 3)))
    a = align(imu, _gt([0.0, 1.0], [0.0, 1.0]))
    np.testing.assert_array_equal(a.position[:, 0], [0.0, 0.5, 1.0])
    assert a.position[0, 0] == 0.0 and a.position[2, 0] == 1.0


def test_align_trims_and_slerps():
    imu = ImuSequence(np.array([0.0, 1.0, 1.5, 2.0, 3.0]), np.zeros((5, 3)), np.zeros((5, 3)))
    gt = GroundTruth([1.0, 2.0], np.zeros((2, 3)), yaw_quat(np.array([0.0, 1.0])))
    a = align(imu, gt)
    assert len(a) == 3 and a.first_index == 1
    assert quat_yaw(a.orientation)[1] == pytest.approx(0.5)


def test_align_disjoint_is_error():
    imu = ImuSequence(np.array([5.0, 6.0]), np.zeros((2, 3)), np.zeros((2, 3)))
    with pytest.raises(DataError):
        align(imu, _gt([0.0, 1.0], [0.0, 1.0]))


# --------------------------------------------------------------------------
# motion heading and labels


def test_motion_heading_straight_lines():
    s = np.linspace(0, 5, 300)
    np.testing.assert_allclose(motion_heading(np.column_stack([s, 0 * s])), 0.0, atol=1e-12)
    np.testing.assert_allclose(motion_heading(np.column_stack([0 * s, s])), math.pi / 2, atol=1e-12)


def test_motion_heading_circle_ramp():
    omega, r, rate = 0.5, 2.0, 100.0
    t = np.arange(1000) / rate
    pos = np.column_stack([r * np.sin(omega * t), r * (1 - np.cos(omega * t))])
    h = motion_heading(pos, rate=rate)
    err = np.angle(np.exp(1j * (h - omega * t)))
    assert np.max(np.abs(err[6:-6])) < 1e-2


def test_motion_heading_holds_when_still():
    s = np.concatenate([np.linspace(0, 1, 100), np.ones(100)])
    h = motion_heading(np.column_stack([0 * s, s]))
    np.testing.assert_allclose(h, math.pi / 2, atol=1e-12)


def test_labels_stationary():
    labels = make_labels(np.zeros((401, 2)), WindowConfig())
    assert all(d.dl == 0.0 and d.dpsi == 0.0 for d in labels)


def test_labels_one_metre_straight():
    s = np.arange(401) / 200.0  # 1 m per 200-frame window
    labels = make_labels(np.column_stack([s, 0 * s]), WindowConfig())
    assert len(labels) == 21
    for d in labels:
        assert d.dl == pytest.approx(1.0, abs=1e-12)
        assert d.dpsi == pytest.approx(0.0, abs=1e-12)


def test_labels_quarter_circle():
    # each 200-frame window sweeps 90 degrees of a radius-r circle
    r, cfg = 1.5, WindowConfig(200, 200)
    phi = np.arange(801) * (math.pi / 2) / 200
    pos = np.column_stack([r * np.sin(phi), r * (1 - np.cos(phi))])
    labels = make_labels(pos, cfg)
    for d in labels:
        assert d.dl == pytest.approx(r * math.sqrt(2), abs=1e-12)
    # once a chain has a previous chord the heading change is the full turn
    for d in labels[1:]:
        assert d.dpsi == pytest.approx(math.pi / 2, abs=1e-12)


def test_chain_anchors_cover_first_window():
    s = np.arange(401) / 200.0
    anchors = chain_anchors(np.column_stack([s, 0 * s]), WindowConfig())
    assert sorted(anchors) == list(range(0, 200, 10))
    assert anchors[50].x == pytest.approx(0.25)


# --------------------------------------------------------------------------
# normalization


def test_constant_channel_normalizes_to_zero():
    X = np.ones((3, 10, 6))
    X[..., 0] = np.arange(30).reshape(3, 10)
    Z = normalize(X, fit_norm(X))
    assert np.all(Z[..., 1:] == 0.0)


@given(st.integers(0, 2**31 - 1))
def test_standardization_moments(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 20, 6)) * rng.uniform(0.1, 10, 6) + rng.uniform(-10, 10, 6)
    Z = np.stack([apply_norm(Window(x, 0), fit_norm(X)).data for x in X])
    np.testing.assert_allclose(Z.reshape(-1, 6).mean(0), 0.0, atol=1e-9)
    np.testing.assert_allclose(Z.reshape(-1, 6).std(0), 1.0, atol=1e-6)


def test_gravity_mean_removed():
    imu, _ = synth(SynthSpec(10.0, (still(10.0),), noise_std=(0.01,) * 6))
    stats = fit_norm(imu.channels()[None])
    assert stats.mean[2] == pytest.approx(GRAVITY, abs=1e-2)
    assert abs(normalize(imu.channels()[None], stats)[..., 2].mean()) < 1e-9


def test_apply_norm_is_not_reapplied():
    stats = NormStats(np.zeros(6), np.full(6, 2.0))
    w = apply_norm(Window(np.ones((200, 6)), 0), stats)
    assert w.normalized
    assert apply_norm(w, stats) is w
    np.testing.assert_array_equal(w.data, 0.5)


def test_norm_stats_round_trip_and_checksum():
    s = fit_norm(np.random.default_rng(0).standard_normal((4, 10, 6)))
    s2 = NormStats.from_dict(json.loads(json.dumps(s.to_dict())))
    assert s2 == s and s2.checksum() == s.checksum()
    assert NormStats(s.mean + 1, s.std).checksum() != s.checksum()


# --------------------------------------------------------------------------
# datasets and split


def test_build_dataset_counts():
    imu, gt = synth(SynthSpec(4.0, (walking(4.0, 1.0),)))  # 401 frames
    ds = build_dataset([imu], [gt])
    # 21 windows fit in 401 frames; all have ground truth at their end frame
    assert len(ds) == len(ds.Y) == 21
    imu400 = imu.slice(0, 400)
    assert len(build_dataset([imu400], [align(imu400, gt)])) == 20


def test_split_ratio_reproducible():
    seqs, gts = [], []
    for i in range(10):
        imu, gt = synth(SynthSpec(3.0, (walking(3.0, 0.5 + 0.1 * i),), seed=i))
        seqs.append(imu)
        gts.append(gt)
    ds = build_dataset(seqs, gts)
    a_tr, a_te = split(ds, 0.5, seed=3)
    b_tr, b_te = split(ds, 0.5, seed=3)
    assert len(a_tr.sequences()) == 5 and len(a_te.sequences()) == 5
    np.testing.assert_array_equal(a_tr.sequences(), b_tr.sequences())
    assert not set(a_tr.sequences()) & set(a_te.sequences())
    assert a_tr.stats == fit_norm(a_tr.X) and a_te.stats == a_tr.stats


def test_dataset_rejects_count_mismatch():
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((3, 200, 6)), np.zeros((2, 2)), NormStats(np.zeros(6), np.ones(6)))


def test_manifest_round_trip(tmp_path):
    m = Manifest([{"imu": "a.csv", "gt": "b.csv"}], split_seed=4)
    m.write(tmp_path / "m.json")
    m2 = Manifest.read(tmp_path / "m.json")
    assert m2.to_dict() == m.to_dict() and m2.root == tmp_path
    (tmp_path / "bad.json").write_text("{}")
    with pytest.raises(DataError):
        Manifest.read(tmp_path / "bad.json")
