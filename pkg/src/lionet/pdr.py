"""Step-based pedestrian dead reckoning baseline."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .pipeline import moving_average
from .types import ImuSequence, Pose2D, Trajectory, wrap_angles


@dataclass(frozen=True)
class PdrParams:
    smooth_window: int = 15       # frames, centered moving average of |a|
    var_window: int = 50          # frames, window of the variance test
    gravity_window: float = 2.0   # seconds, moving average removed as gravity
    mean_threshold: float = 0.8   # m/s^2
    var_threshold: float = 0.5    # (m/s^2)^2
    min_gap: float = 0.3          # seconds between step onsets
    weinberg_k: float = 0.48
    initial_pose: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self):
        if self.smooth_window < 1 or self.var_window < 1:
            raise ValueError("windows must be >= 1 frame")
        if min(self.mean_threshold, self.var_threshold, self.min_gap, self.weinberg_k, self.gravity_window) <= 0:
            raise ValueError("thresholds, gap, gain and gravity window must be > 0")

    @classmethod
    def from_dict(cls, d: dict) -> PdrParams:
        d = dict(d)
        if "initial_pose" in d:
            d["initial_pose"] = Pose2D(*d["initial_pose"])
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> PdrParams:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        d = asdict(self)
        p = self.initial_pose
        d["initial_pose"] = [p.x, p.y, p.psi]
        return d


@dataclass(frozen=True)
class StepEvent:
    start: int
    end: int       # exclusive
    a_max: float
    a_min: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("step start must precede its end")
        if self.a_max < self.a_min:
            raise ValueError("a_max must be >= a_min")


def _half(frames: int) -> int:
    return max(frames // 2, 0)


def step_signal(seq: ImuSequence, p: PdrParams) -> np.ndarray:
    """Gravity-removed, smoothed acceleration magnitude."""
    mag = np.linalg.norm(seq.accel, axis=1)
    g_half = _half(int(round(p.gravity_window * seq.nominal_rate)))
    return moving_average(mag - moving_average(mag, g_half), _half(p.smooth_window))


def detect_steps(seq: ImuSequence, p: PdrParams = PdrParams()) -> list[StepEvent]:
    """Threshold the windowed mean and variance of the step signal.

    Frames where both exceed their thresholds form candidate runs; a run
    starting less than ``min_gap`` after the previous step onset is merged
    into that step.  Each step spans from its onset to the next onset (the
    last one to its onset plus the previous step length, or twice its run).
    """
    sig = step_signal(seq, p)
    mean = sig  # already the smoothing-window mean
    centered = sig - moving_average(sig, _half(p.var_window))
    var = moving_average(centered * centered, _half(p.var_window))
    cand = (mean > p.mean_threshold) & (var > p.var_threshold)
    if not np.any(cand):
        return []
    edges = np.diff(cand.astype(np.int8), prepend=0, append=0)
    run_starts = np.flatnonzero(edges == 1)
    run_ends = np.flatnonzero(edges == -1)

    min_gap = p.min_gap * seq.nominal_rate
    onsets, last_end = [], []
    for s, e in zip(run_starts, run_ends):
        if onsets and s - onsets[-1] < min_gap:
            last_end[-1] = e
            continue
        onsets.append(int(s))
        last_end.append(int(e))

    n = len(sig)
    steps = []
    for i, s in enumerate(onsets):
        if i + 1 < len(onsets):
            e = onsets[i + 1]
        elif i > 0:
            e = min(n, s + (onsets[i] - onsets[i - 1]))
        else:
            e = min(n, s + 2 * (last_end[i] - s))
        seg = sig[s:e]
        steps.append(StepEvent(int(s), int(e), float(seg.max()), float(seg.min())))
    return steps


def step_length(ev: StepEvent, k: float = 0.48) -> float:
    """Weinberg's estimate ``k * (a_max - a_min) ** (1/4)``."""
    return k * (ev.a_max - ev.a_min) ** 0.25


def integrate_heading(seq: ImuSequence, psi0: float = 0.0) -> np.ndarray:
    """Wrapped yaw from trapezoidal integration of ``gyro_z``."""
    gz = seq.gyro[:, 2]
    dt = np.diff(seq.t)
    psi = psi0 + np.concatenate([[0.0], np.cumsum(0.5 * (gz[1:] + gz[:-1]) * dt)])
    return wrap_angles(psi)


def pdr_track(seq: ImuSequence, p: PdrParams = PdrParams(), steps: list[StepEvent] | None = None) -> Trajectory:
    """Initial pose at the first timestamp, then one pose per step (detected
    unless ``steps`` is given), placed along the gyro heading at the step end."""
    heading = integrate_heading(seq, p.initial_pose.psi)
    x, y = p.initial_pose.x, p.initial_pose.y
    times, xs, ys, psis = [seq.t[0]], [x], [y], [p.initial_pose.psi]
    for ev in detect_steps(seq, p) if steps is None else steps:
        dl = step_length(ev, p.weinberg_k)
        psi = heading[ev.end - 1]
        x += dl * math.cos(psi)
        y += dl * math.sin(psi)
        times.append(seq.t[ev.end - 1])
        xs.append(x)
        ys.append(y)
        psis.append(psi)
    return Trajectory(times, xs, ys, psis)
