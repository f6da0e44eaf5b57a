"""Sliding-window inference plumbing: segmentation, multi-chain trajectory
reconstruction, smoothing, velocity estimates, trajectory error metrics and
trajectory export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .types import (
    DEFAULT_RATE,
    ImuSequence,
    PolarDelta,
    Pose2D,
    Trajectory,
    VelocityEstimate,
    Window,
    WindowConfig,
    advance_pose,
)


def window_starts(length: int, cfg: WindowConfig) -> np.ndarray:
    if length < cfg.n:
        raise DataError(f"sequence of {length} frames is shorter than the window ({cfg.n})")
    return np.arange(0, length - cfg.n + 1, cfg.stride)


def segment_array(channels: np.ndarray, cfg: WindowConfig) -> tuple[np.ndarray, np.ndarray]:
    """``(N, 6)`` -> ``(M, n, 6)`` windows (a copy) and their start frames."""
    starts = window_starts(len(channels), cfg)
    idx = starts[:, None] + np.arange(cfg.n)[None, :]
    return channels[idx], starts


def segment(seq: ImuSequence, cfg: WindowConfig = WindowConfig()) -> list[Window]:
    """Cut ``seq`` into windows starting at 0, stride, 2*stride, ...; a trailing
    partial window is dropped."""
    X, starts = segment_array(seq.channels(), cfg)
    return [Window(x, int(s)) for x, s in zip(X, starts)]


@dataclass(frozen=True)
class SmoothConfig:
    delta_half_width: int = 2
    position_half_width: int = 2
    smooth_deltas: bool = True
    smooth_positions: bool = True

    def __post_init__(self):
        if self.delta_half_width < 0 or self.position_half_width < 0:
            raise ValueError("half-widths must be >= 0")


NO_SMOOTHING = SmoothConfig(0, 0, False, False)


def moving_average(values: np.ndarray, half_width: int) -> np.ndarray:
    """Centered moving average along axis 0; the window shrinks at the ends."""
    values = np.asarray(values, dtype=np.float64)
    if half_width == 0 or len(values) == 0:
        return values.copy()
    n = len(values)
    csum = np.concatenate([np.zeros((1,) + values.shape[1:]), np.cumsum(values, axis=0)])
    i = np.arange(n)
    lo = np.clip(i - half_width, 0, n)
    hi = np.clip(i + half_width + 1, 0, n)
    counts = (hi - lo).reshape((-1,) + (1,) * (values.ndim - 1))
    return (csum[hi] - csum[lo]) / counts


class ChainState:
    """Poses of the last ``n / stride`` window endpoints, keyed by frame.

    Window ``[s, s + n)`` is chained onto the pose recorded at frame ``s``;
    frames before ``n`` fall back to their anchor (by default the shared
    initial pose).
    """

    def __init__(self, init: Pose2D, cfg: WindowConfig, anchors: Mapping[int, Pose2D] | None = None):
        self.init = init
        self.cfg = cfg
        self.anchors = dict(anchors or {})
        self._poses: dict[int, Pose2D] = {}

    @property
    def capacity(self) -> int:
        return self.cfg.chains

    def pose_at(self, frame: int) -> Pose2D:
        if frame in self._poses:
            return self._poses[frame]
        if frame < self.cfg.n:
            return self.anchors.get(frame, self.init)
        raise DataError(f"no chained pose for frame {frame}; window starts must follow the stride grid")

    def push(self, frame: int, pose: Pose2D) -> None:
        self._poses[frame] = pose
        horizon = frame - self.cfg.n
        for old in [f for f in self._poses if f < horizon]:
            del self._poses[old]


def reconstruct(
    deltas: Sequence[PolarDelta],
    init: Pose2D = Pose2D(),
    cfg: WindowConfig = WindowConfig(),
    smooth: SmoothConfig | None = None,
    *,
    rate: float = DEFAULT_RATE,
    t0: float = 0.0,
    starts: Sequence[int] | None = None,
    anchors: Mapping[int, Pose2D] | None = None,
) -> Trajectory:
    """Chain per-window polar vectors into a trajectory.

    The pose for the window starting at frame ``s`` is
    ``advance_pose(pose at frame s, delta)`` and is stamped at frame ``s + n``,
    so each chain advances ``n`` frames per update while consecutive outputs
    are ``stride`` frames apart.  The returned trajectory starts with ``init``
    at ``t0``.  ``anchors`` optionally overrides the starting pose of
    individual chains (frames ``< n``).
    """
    smooth = smooth or NO_SMOOTHING
    m = len(deltas)
    if starts is None:
        starts = [j * cfg.stride for j in range(m)]
    if len(starts) != m:
        raise ValueError("starts and deltas differ in length")

    dl = np.array([d.dl for d in deltas], dtype=np.float64)
    dpsi = np.array([d.dpsi for d in deltas], dtype=np.float64)
    if smooth.smooth_deltas and smooth.delta_half_width > 0:
        dl = moving_average(dl, smooth.delta_half_width)
        dpsi = moving_average(dpsi, smooth.delta_half_width)

    state = ChainState(init, cfg, anchors)
    times = [t0]
    poses = [init]
    for s, a, b in zip(starts, dl, dpsi):
        s = int(s)
        pose = advance_pose(state.pose_at(s), PolarDelta(max(float(a), 0.0), float(b)))
        state.push(s + cfg.n, pose)
        times.append(t0 + (s + cfg.n) / rate)
        poses.append(pose)

    traj = Trajectory.from_poses(times, poses)
    if smooth.smooth_positions and smooth.position_half_width > 0 and m > 0:
        xy = traj.xy
        xy[1:] = moving_average(xy[1:], smooth.position_half_width)
        traj = Trajectory(traj.t, xy[:, 0], xy[:, 1], traj.psi)
    return traj


def hold_at(traj: Trajectory, times: np.ndarray) -> Trajectory:
    """Zero-order hold: the latest pose at or before each time (the first
    pose for earlier times), i.e. what a dead-reckoning track reports between
    its updates."""
    times = np.asarray(times, dtype=np.float64)
    if len(traj) == 0:
        raise DataError("empty trajectory")
    idx = np.clip(np.searchsorted(traj.t, times, side="right") - 1, 0, len(traj) - 1)
    return Trajectory(times, traj.x[idx], traj.y[idx], traj.psi[idx])


def velocity_estimate(delta: PolarDelta, cfg: WindowConfig = WindowConfig(),
                      rate: float = DEFAULT_RATE) -> VelocityEstimate:
    """Average speed and heading rate over one window of ``n / rate`` seconds."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    duration = cfg.n / rate
    return VelocityEstimate(delta.dl / duration, delta.dpsi / duration)


@dataclass
class AteResult:
    rmse: float
    endpoint_error: float
    distance: list[float] = field(default_factory=list)
    error: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "endpoint_error": self.endpoint_error,
                "curve": {"distance": self.distance, "error": self.error}}


def ate(pred: Trajectory, gt: Trajectory, max_dt: float | None = None) -> AteResult:
    """Position error after nearest-time association, no spatial alignment.

    Predicted poses outside the ground-truth time support (widened by
    ``max_dt``, default half the median ground-truth spacing) are ignored.
    The error-vs-distance curve pairs the ground-truth path length travelled
    at each associated pose with that pose's error.
    """
    if len(pred) == 0 or len(gt) == 0:
        raise DataError("empty trajectory")
    if max_dt is None:
        max_dt = 0.5 * float(np.median(np.diff(gt.t))) if len(gt) > 1 else 0.0
    inside = (pred.t >= gt.t[0] - max_dt) & (pred.t <= gt.t[-1] + max_dt)
    if not np.any(inside):
        raise DataError("trajectories do not overlap in time")
    pt = pred.t[inside]
    j = np.clip(np.searchsorted(gt.t, pt), 1, max(len(gt) - 1, 1))
    if len(gt) > 1:
        j = np.where(np.abs(gt.t[j - 1] - pt) <= np.abs(gt.t[j] - pt), j - 1, j)
    else:
        j = np.zeros_like(j)
    err = np.linalg.norm(pred.xy[inside] - gt.xy[j], axis=1)
    path = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(gt.xy, axis=0), axis=1))])
    return AteResult(
        rmse=float(np.sqrt(np.mean(err ** 2))),
        endpoint_error=float(err[-1]),
        distance=path[j].tolist(),
        error=err.tolist(),
    )


# --------------------------------------------------------------------------
# export


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "psi"])
        for row in zip(traj.t, traj.x, traj.y, traj.psi):
            w.writerow([repr(float(v)) for v in row])


def read_trajectory_csv(path: str | Path) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


def trajectory_to_json(traj: Trajectory) -> dict:
    return {"t": traj.t.tolist(), "x": traj.x.tolist(), "y": traj.y.tolist(), "psi": traj.psi.tolist()}


def write_trajectory_json(traj: Trajectory, path: str | Path) -> None:
    Path(path).write_text(json.dumps(trajectory_to_json(traj)))


def write_trajectory(traj: Trajectory, path: str | Path) -> None:
    """CSV unless the suffix is ``.json``."""
    if str(path).endswith(".json"):
        write_trajectory_json(traj, path)
    else:
        write_trajectory_csv(traj, path)
