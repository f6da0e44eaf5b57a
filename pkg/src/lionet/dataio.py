"""Loading recordings, aligning them with ground truth and turning them into
labelled windows.

Labels
------
A window covering frames ``[s, s + n)`` is labelled with the displacement
from the ground-truth position at frame ``s`` to the one at frame ``s + n``
(the first frame of the next window on the same reconstruction chain):
``dl`` is the planar chord length and ``dpsi`` the change of the chord
direction relative to the previous window on that chain.  Chains whose first
window starts before frame ``n`` are referenced to the ground-truth motion
heading at their start frame.  With these definitions, chaining the labels
with :func:`lionet.types.advance_pose` reproduces the ground-truth chain
endpoints exactly, and on steady turns ``dpsi`` equals the heading change
over the window.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import DataError
from .pipeline import moving_average, segment_array
from .types import (
    DEFAULT_RATE,
    GRAVITY,
    ImuSequence,
    PolarDelta,
    Pose2D,
    Window,
    WindowConfig,
    wrap_angle,
)

log = logging.getLogger(__name__)

QUAT_WARN_TOL = 1e-3
MIN_SPEED = 0.05
HEADING_HALF_WIDTH = 5
MIN_CHORD = 0.05
STD_FLOOR = 1e-6


# --------------------------------------------------------------------------
# CSV ingestion


@dataclass(frozen=True)
class ColumnMap:
    """0-based column indices for IMU and ground-truth CSV files.

    ``accel_offset`` columns, when given, are added to ``accel`` before
    scaling (for recordings that store gravity and user acceleration apart).
    Ground-truth quaternions are listed in ``(w, x, y, z)`` order.
    """

    imu_t: int = 0
    accel: tuple[int, int, int] = (1, 2, 3)
    gyro: tuple[int, int, int] = (4, 5, 6)
    mag: tuple[int, int, int] | None = None
    accel_offset: tuple[int, int, int] | None = None
    accel_scale: float = 1.0
    gt_t: int = 0
    position: tuple[int, int, int] = (1, 2, 3)
    quat: tuple[int, int, int, int] = (4, 5, 6, 7)
    time_scale: float = 1.0
    delimiter: str = ","

    def __post_init__(self):
        for name in ("accel", "gyro", "mag", "accel_offset", "position", "quat"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(i) for i in v))
        imu = self.imu_columns()
        gt = self.gt_columns()
        if len(set(imu)) != len(imu) or len(set(gt)) != len(gt):
            raise ValueError("column indices must be distinct")
        if min(imu + gt) < 0:
            raise ValueError("column indices must be >= 0")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")

    def imu_columns(self) -> list[int]:
        cols = [self.imu_t, *self.accel, *self.gyro]
        for extra in (self.mag, self.accel_offset):
            if extra is not None:
                cols += list(extra)
        return cols

    def gt_columns(self) -> list[int]:
        return [self.gt_t, *self.position, *self.quat]

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> ColumnMap:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown ColumnMap keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def oxiod(cls) -> ColumnMap:
        """Assumed layout of the public OxIOD ``imu*.csv`` / ``vi*.csv`` files:
        time, attitude(3), rotation rate(3), gravity(3), user acceleration(3),
        magnetic field(3); and time, header, translation(3), rotation(x, y, z, w).
        Accelerations there are in units of g."""
        return cls(imu_t=0, gyro=(4, 5, 6), accel_offset=(7, 8, 9), accel=(10, 11, 12),
                   mag=(13, 14, 15), accel_scale=GRAVITY,
                   gt_t=0, position=(2, 3, 4), quat=(8, 5, 6, 7))


def _read_numeric_rows(path: str | Path, delimiter: str, needed: int) -> tuple[np.ndarray, list[int]]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    rows, lines = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: non-numeric field in row {row!r}") from None
            if len(values) < needed:
                raise DataError(f"{path}:{lineno}: expected at least {needed} columns, got {len(values)}")
            if not all(math.isfinite(v) for v in values):
                raise DataError(f"{path}:{lineno}: non-finite value")
            rows.append(values)
            lines.append(lineno)
    if len(rows) < 2:
        raise DataError(f"{path}: fewer than 2 valid rows")
    width = min(len(r) for r in rows)
    return np.array([r[:width] for r in rows], dtype=np.float64), lines


def _monotonic_mask(t: np.ndarray) -> np.ndarray:
    keep = np.zeros(len(t), dtype=bool)
    last = -math.inf
    for i, v in enumerate(t):
        if v > last:
            keep[i] = True
            last = v
    return keep


def load_imu_csv(path: str | Path, cmap: ColumnMap = ColumnMap(),
                 nominal_rate: float = DEFAULT_RATE, report: dict | None = None) -> ImuSequence:
    """Parse an IMU CSV file.

    Rows whose timestamp does not increase are dropped; the count is logged
    and stored under ``report["dropped"]`` when a dict is passed.
    """
    data, _ = _read_numeric_rows(path, cmap.delimiter, max(cmap.imu_columns()) + 1)
    t = data[:, cmap.imu_t] * cmap.time_scale
    keep = _monotonic_mask(t)
    dropped = int(len(t) - keep.sum())
    if dropped:
        log.warning("%s: dropped %d row(s) with non-increasing timestamps", path, dropped)
    if report is not None:
        report["dropped"] = dropped
    data, t = data[keep], t[keep]
    if len(t) < 2:
        raise DataError(f"{path}: fewer than 2 valid rows")
    accel = data[:, list(cmap.accel)]
    if cmap.accel_offset is not None:
        accel = accel + data[:, list(cmap.accel_offset)]
    accel = accel * cmap.accel_scale
    mag = data[:, list(cmap.mag)] if cmap.mag is not None else None
    try:
        return ImuSequence(t, accel, data[:, list(cmap.gyro)], mag, nominal_rate)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# ground truth


@dataclass(frozen=True, eq=False)
class GroundTruthPose:
    t: float
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)

    @property
    def yaw(self) -> float:
        return float(quat_yaw(self.orientation[None])[0])


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Array-backed list of :class:`GroundTruthPose`."""

    t: np.ndarray
    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        pos = np.asarray(self.position, dtype=np.float64).reshape(-1, 3)
        q = np.asarray(self.orientation, dtype=np.float64).reshape(-1, 4)
        if not (len(t) == len(pos) == len(q)):
            raise ValueError("ground-truth columns differ in length")
        norms = np.linalg.norm(q, axis=1)
        if np.any(norms == 0) or not np.all(np.isfinite(norms)):
            raise DataError("ground-truth quaternion with zero or non-finite norm")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", q / norms[:, None])

    @classmethod
    def from_poses(cls, poses: Sequence[GroundTruthPose]) -> GroundTruth:
        return cls([p.t for p in poses], [p.position for p in poses], [p.orientation for p in poses])

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> GroundTruthPose:
        return GroundTruthPose(float(self.t[i]), self.position[i].copy(), self.orientation[i].copy())

    def __iter__(self) -> Iterator[GroundTruthPose]:
        for i in range(len(self)):
            yield self[i]

    @property
    def yaw(self) -> np.ndarray:
        return quat_yaw(self.orientation)


def quat_yaw(q: np.ndarray) -> np.ndarray:
    """Yaw (rotation about +z) of ``(w, x, y, z)`` quaternions."""
    w, x, y, z = np.moveaxis(np.asarray(q, dtype=np.float64), -1, 0)
    return np.arctan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))


def yaw_quat(yaw: np.ndarray) -> np.ndarray:
    yaw = np.asarray(yaw, dtype=np.float64)
    zeros = np.zeros_like(yaw)
    return np.stack([np.cos(yaw / 2), zeros, zeros, np.sin(yaw / 2)], axis=-1)


def load_gt_csv(path: str | Path, cmap: ColumnMap = ColumnMap()) -> GroundTruth:
    """Parse a ground-truth CSV; quaternions are renormalised, with a warning
    when a norm is off by more than 1e-3."""
    data, lines = _read_numeric_rows(path, cmap.delimiter, max(cmap.gt_columns()) + 1)
    t = data[:, cmap.gt_t] * cmap.time_scale
    keep = _monotonic_mask(t)
    dropped = int(len(t) - keep.sum())
    if dropped:
        log.warning("%s: dropped %d row(s) with non-increasing timestamps", path, dropped)
    q = data[:, list(cmap.quat)]
    norms = np.linalg.norm(q, axis=1)
    for i in np.flatnonzero(norms == 0):
        raise DataError(f"{path}:{lines[i]}: zero quaternion")
    bad = np.abs(norms - 1.0) > QUAT_WARN_TOL
    if np.any(bad & keep):
        log.warning("%s: %d quaternion(s) deviate from unit norm by more than %g; renormalised",
                    path, int(np.sum(bad & keep)), QUAT_WARN_TOL)
    data, t = data[keep], t[keep]
    if len(t) < 2:
        raise DataError(f"{path}: fewer than 2 valid rows")
    return GroundTruth(t, data[:, list(cmap.position)], data[:, list(cmap.quat)])


def slerp(q0: np.ndarray, q1: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise spherical interpolation between unit quaternions."""
    u = np.asarray(u, dtype=np.float64)[:, None]
    dot = np.sum(q0 * q1, axis=1, keepdims=True)
    q1 = np.where(dot < 0, -q1, q1)
    dot = np.abs(dot)
    near = dot > 0.9995
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    sin_t = np.where(near, 1.0, np.sin(theta))
    a = np.where(near, 1.0 - u, np.sin((1.0 - u) * theta) / sin_t)
    b = np.where(near, u, np.sin(u * theta) / sin_t)
    out = a * q0 + b * q1
    return out / np.linalg.norm(out, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class AlignedGroundTruth:
    """Ground truth resampled at the timestamps of ``imu`` (already trimmed)."""

    imu: ImuSequence
    position: np.ndarray
    orientation: np.ndarray
    first_index: int = 0

    @property
    def t(self) -> np.ndarray:
        return self.imu.t

    def __len__(self) -> int:
        return len(self.imu)


def align(imu: ImuSequence, gt: GroundTruth | Sequence[GroundTruthPose]) -> AlignedGroundTruth:
    """Interpolate ground truth at every IMU timestamp inside its time range
    (linear for positions, slerp for orientations); other samples are trimmed."""
    if not isinstance(gt, GroundTruth):
        gt = GroundTruth.from_poses(list(gt))
    if len(gt) == 0:
        raise DataError("empty ground truth")
    inside = (imu.t >= gt.t[0]) & (imu.t <= gt.t[-1])
    if not np.any(inside):
        raise DataError("IMU and ground-truth time ranges do not overlap")
    idx = np.flatnonzero(inside)
    lo, hi = int(idx[0]), int(idx[-1]) + 1
    t = imu.t[lo:hi]
    if len(gt) == 1:
        pos = np.repeat(gt.position, len(t), axis=0)
        quat = np.repeat(gt.orientation, len(t), axis=0)
    else:
        j = np.clip(np.searchsorted(gt.t, t, side="right"), 1, len(gt) - 1)
        t0, t1 = gt.t[j - 1], gt.t[j]
        u = (t - t0) / (t1 - t0)
        pos = gt.position[j - 1] + u[:, None] * (gt.position[j] - gt.position[j - 1])
        quat = slerp(gt.orientation[j - 1], gt.orientation[j], u)
        exact = u == 0.0
        pos[exact] = gt.position[j - 1][exact]
        quat[exact] = gt.orientation[j - 1][exact]
    return AlignedGroundTruth(imu.slice(lo, hi), pos, quat, lo)


# --------------------------------------------------------------------------
# labels


def motion_heading(positions: np.ndarray, half_width: int = HEADING_HALF_WIDTH,
                   rate: float = DEFAULT_RATE, min_speed: float = MIN_SPEED) -> np.ndarray:
    """Per-frame direction of travel from planar positions.

    Velocity is taken by central differences, box-smoothed over
    ``2 * half_width + 1`` frames; frames slower than ``min_speed`` inherit
    the last valid heading (leading slow frames take the first valid one).
    A trajectory that never moves has heading 0 throughout.
    """
    p = np.asarray(positions, dtype=np.float64)[:, :2]
    if len(p) < 2 * half_width + 2:
        raise DataError(f"need at least {2 * half_width + 2} frames, got {len(p)}")
    vel = np.gradient(p, axis=0) * rate
    vel = moving_average(vel, half_width)
    speed = np.hypot(vel[:, 0], vel[:, 1])
    valid = speed >= min_speed
    if not np.any(valid):
        return np.zeros(len(p))
    heading = np.arctan2(vel[:, 1], vel[:, 0])
    # forward-fill from the last valid frame, back-fill the leading gap
    last = np.where(valid, np.arange(len(p)), -1)
    np.maximum.accumulate(last, out=last)
    last[last < 0] = np.flatnonzero(valid)[0]
    return heading[last]


def label_starts(length: int, cfg: WindowConfig) -> np.ndarray:
    """Window starts that have ground truth at their end frame ``s + n``."""
    if length < cfg.n + 1:
        raise DataError(f"need at least {cfg.n + 1} ground-truth frames, got {length}")
    return np.arange(0, length - cfg.n, cfg.stride)


def chain_reference_headings(positions: np.ndarray, cfg: WindowConfig, headings: np.ndarray,
                             min_chord: float = MIN_CHORD) -> dict[int, float]:
    """Heading state of every chain node: motion heading for frames < n,
    otherwise the chord direction of the window ending there (held from the
    previous node when the chord is shorter than ``min_chord``)."""
    p = np.asarray(positions, dtype=np.float64)[:, :2]
    ref: dict[int, float] = {}
    for s in label_starts(len(p), cfg):
        s = int(s)
        base = ref.get(s, float(headings[s]))
        ref.setdefault(s, base)
        dx, dy = p[s + cfg.n] - p[s]
        ref[s + cfg.n] = math.atan2(dy, dx) if math.hypot(dx, dy) >= min_chord else base
    return ref


def make_labels(positions: np.ndarray | AlignedGroundTruth, cfg: WindowConfig = WindowConfig(),
                headings: np.ndarray | None = None, rate: float = DEFAULT_RATE,
                min_chord: float = MIN_CHORD) -> list[PolarDelta]:
    """One polar vector per window start in :func:`label_starts`."""
    if isinstance(positions, AlignedGroundTruth):
        rate = positions.imu.nominal_rate
        positions = positions.position
    p = np.asarray(positions, dtype=np.float64)[:, :2]
    starts = label_starts(len(p), cfg)
    if headings is None:
        headings = motion_heading(p, rate=rate)
    ref = chain_reference_headings(p, cfg, headings, min_chord)
    out = []
    for s in starts:
        s = int(s)
        dx, dy = p[s + cfg.n] - p[s]
        out.append(PolarDelta(math.hypot(dx, dy), wrap_angle(ref[s + cfg.n] - ref[s])))
    return out


def chain_anchors(positions: np.ndarray, cfg: WindowConfig, headings: np.ndarray | None = None,
                  rate: float = DEFAULT_RATE, min_chord: float = MIN_CHORD) -> dict[int, Pose2D]:
    """Ground-truth starting pose of every chain (frames ``< n`` on the stride
    grid), matching the heading convention of :func:`make_labels`."""
    p = np.asarray(positions, dtype=np.float64)[:, :2]
    if headings is None:
        headings = motion_heading(p, rate=rate)
    ref = chain_reference_headings(p, cfg, headings, min_chord)
    return {s: Pose2D(p[s, 0], p[s, 1], ref[s]) for s in ref if s < cfg.n}


# --------------------------------------------------------------------------
# normalization


@dataclass(frozen=True, eq=False)
class NormStats:
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(6)
        std = np.asarray(self.std, dtype=np.float64).reshape(6)
        if not np.all(std > 0):
            raise ValueError("std components must be > 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d: dict) -> NormStats:
        return cls(d["mean"], d["std"])

    def checksum(self) -> str:
        blob = json.dumps([[repr(float(v)) for v in self.mean], [repr(float(v)) for v in self.std]])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __eq__(self, other) -> bool:
        return isinstance(other, NormStats) and self.checksum() == other.checksum()

    __hash__ = None


def _as_array(windows) -> np.ndarray:
    if isinstance(windows, np.ndarray):
        return windows.reshape(-1, windows.shape[-2], 6) if windows.ndim >= 2 else windows
    return np.stack([w.data for w in windows])


def fit_norm(windows) -> NormStats:
    """Per-channel mean and (floored) standard deviation over all frames."""
    X = _as_array(windows)
    if X.size == 0:
        raise DataError("cannot fit normalization on zero windows")
    flat = X.reshape(-1, 6).astype(np.float64)
    return NormStats(flat.mean(axis=0), np.maximum(flat.std(axis=0), STD_FLOOR))


def normalize(X: np.ndarray, stats: NormStats) -> np.ndarray:
    return (X - stats.mean) / stats.std


def apply_norm(window: Window, stats: NormStats) -> Window:
    if window.normalized:
        return window
    return Window(normalize(window.data, stats), window.start_index, normalized=True)


# --------------------------------------------------------------------------
# datasets


@dataclass(eq=False)
class LabeledDataset:
    """Raw windows ``X (M, n, 6)``, labels ``Y (M, 2)`` and provenance."""

    X: np.ndarray
    Y: np.ndarray
    stats: NormStats
    cfg: WindowConfig = field(default_factory=WindowConfig)
    starts: np.ndarray | None = None
    seq_ids: np.ndarray | None = None

    def __post_init__(self):
        if len(self.X) != len(self.Y):
            raise ValueError(f"{len(self.X)} windows but {len(self.Y)} labels")
        if self.X.ndim != 3 or self.X.shape[1:] != (self.cfg.n, 6):
            raise ValueError(f"windows must be (M, {self.cfg.n}, 6), got {self.X.shape}")
        if not np.all(np.isfinite(self.Y)):
            raise ValueError("labels must be finite")
        m = len(self.X)
        if self.starts is None:
            self.starts = np.zeros(m, dtype=np.int64)
        if self.seq_ids is None:
            self.seq_ids = np.zeros(m, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.X)

    @property
    def windows(self) -> list[Window]:
        return [Window(x, int(s)) for x, s in zip(self.X, self.starts)]

    @property
    def labels(self) -> list[PolarDelta]:
        return [PolarDelta(max(dl, 0.0), dpsi) for dl, dpsi in self.Y]

    def normalized_X(self) -> np.ndarray:
        return normalize(self.X, self.stats)

    def subset(self, mask: np.ndarray, stats: NormStats | None = None) -> LabeledDataset:
        return LabeledDataset(self.X[mask], self.Y[mask], stats or self.stats, self.cfg,
                              self.starts[mask], self.seq_ids[mask])

    def sequences(self) -> np.ndarray:
        return np.unique(self.seq_ids)


def build_dataset(sequences: Sequence[ImuSequence], gt: Sequence, cfg: WindowConfig = WindowConfig(),
                  stats: NormStats | None = None) -> LabeledDataset:
    """Window every sequence and label each window from its ground truth.

    ``gt[i]`` is either an :class:`AlignedGroundTruth` for ``sequences[i]`` or
    raw ground truth to be aligned here.  Only windows whose end frame has
    ground truth are kept.
    """
    if len(sequences) != len(gt):
        raise ValueError("need one ground truth per sequence")
    Xs, Ys, S, ids = [], [], [], []
    for k, (seq, g) in enumerate(zip(sequences, gt)):
        aligned = g if isinstance(g, AlignedGroundTruth) else align(seq, g)
        labels = make_labels(aligned, cfg)
        X, starts = segment_array(aligned.imu.channels(), cfg)
        m = len(labels)
        Xs.append(X[:m])
        Ys.append([(d.dl, d.dpsi) for d in labels])
        S.append(starts[:m])
        ids.append(np.full(m, k, dtype=np.int64))
    if not Xs:
        raise DataError("no sequences")
    X = np.concatenate(Xs)
    return LabeledDataset(X, np.asarray(np.concatenate(Ys), dtype=np.float64).reshape(-1, 2),
                          stats or fit_norm(X), cfg, np.concatenate(S), np.concatenate(ids))


def split(dataset: LabeledDataset, ratio: float, seed: int = 0) -> tuple[LabeledDataset, LabeledDataset]:
    """Sequence-level seeded split; normalization is refit on the training side."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    seqs = dataset.sequences()
    if len(seqs) < 2:
        raise DataError("need at least two sequences to split")
    order = np.random.default_rng(seed).permutation(seqs)
    n_train = min(max(int(round(ratio * len(seqs))), 1), len(seqs) - 1)
    train_ids = np.sort(order[:n_train])
    mask = np.isin(dataset.seq_ids, train_ids)
    stats = fit_norm(dataset.X[mask])
    return dataset.subset(mask, stats), dataset.subset(~mask, stats)


# --------------------------------------------------------------------------
# manifests


@dataclass
class Manifest:
    """Dataset manifest: sequence file pairs plus how to read and window them."""

    sequences: list[dict]
    column_map: ColumnMap = field(default_factory=ColumnMap)
    window: WindowConfig = field(default_factory=WindowConfig)
    split_seed: int = 0
    split_ratio: float = 0.8
    rate: float = DEFAULT_RATE
    root: Path = field(default=Path("."))

    def to_dict(self) -> dict:
        return {
            "sequences": self.sequences,
            "column_map": self.column_map.to_dict(),
            "window": {"n": self.window.n, "stride": self.window.stride},
            "split_seed": self.split_seed,
            "split_ratio": self.split_ratio,
            "rate": self.rate,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def read(cls, path: str | Path) -> Manifest:
        path = Path(path)
        if not path.is_file():
            raise DataError(f"no such manifest: {path}")
        try:
            d = json.loads(path.read_text())
            return cls(
                sequences=list(d["sequences"]),
                column_map=ColumnMap.from_dict(d.get("column_map", {})),
                window=WindowConfig(**d.get("window", {})),
                split_seed=int(d.get("split_seed", 0)),
                split_ratio=float(d.get("split_ratio", 0.8)),
                rate=float(d.get("rate", DEFAULT_RATE)),
                root=path.parent,
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: invalid manifest ({exc})") from exc

    def load(self) -> tuple[list[ImuSequence], list[AlignedGroundTruth]]:
        seqs, gts = [], []
        for entry in self.sequences:
            imu = load_imu_csv(self.root / entry["imu"], self.column_map, self.rate)
            gt = load_gt_csv(self.root / entry["gt"], self.column_map)
            aligned = align(imu, gt)
            seqs.append(aligned.imu)
            gts.append(aligned)
        return seqs, gts

    def dataset(self) -> LabeledDataset:
        seqs, gts = self.load()
        return build_dataset(seqs, gts, self.window)

    def split_datasets(self) -> tuple[LabeledDataset, LabeledDataset]:
        return split(self.dataset(), self.split_ratio, self.split_seed)

    def with_root(self, root: Path) -> Manifest:
        return replace(self, root=Path(root))
