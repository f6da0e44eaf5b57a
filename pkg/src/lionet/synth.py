"""Synthetic pedestrian / trolley IMU recordings with exact ground truth.

The device is assumed level with its x axis along the direction of travel,
y to the left and z up, so device yaw equals motion heading.  Ground truth is
integrated from the speed / turn-rate profile only; the random seed drives
sensor noise and wheel vibration, never the trajectory.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataio import ColumnMap, GroundTruth, Manifest, yaw_quat
from .pipeline import moving_average
from .types import DEFAULT_RATE, GRAVITY, ImuSequence, Pose2D, WindowConfig

#: Weinberg gain the default gait model is built around
WEINBERG_K = 0.48


@dataclass(frozen=True)
class MotionSegment:
    duration: float
    speed: float = 0.0
    turn_rate: float = 0.0
    gait_freq: float = 0.0
    gait_amp: float = 0.0
    vibration: float = 0.0  # accel noise std per m/s of speed (wheeled motion)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("segment duration must be > 0")
        if self.speed < 0 or self.gait_freq < 0 or self.gait_amp < 0 or self.vibration < 0:
            raise ValueError("speed, gait and vibration parameters must be >= 0")


def gait_for_speed(speed: float, k: float = WEINBERG_K) -> tuple[float, float]:
    """Cadence (Hz) and vertical bounce amplitude (m/s^2) for a walking speed.

    Cadence grows linearly with speed; the amplitude is chosen so that
    Weinberg's ``k * (a_max - a_min) ** 0.25`` returns the step length
    ``speed / cadence`` with ``a_max - a_min = 2 * amplitude``.
    """
    if speed <= 0:
        return 0.0, 0.0
    freq = 1.0 + 0.5 * speed
    step = speed / freq
    return freq, 0.5 * (step / k) ** 4


def walking(duration: float, speed: float, turn_rate: float = 0.0) -> MotionSegment:
    f, a = gait_for_speed(speed)
    return MotionSegment(duration, speed, turn_rate, f, a)


def trolley(duration: float, speed: float, turn_rate: float = 0.0, vibration: float = 0.4) -> MotionSegment:
    return MotionSegment(duration, speed, turn_rate, vibration=vibration)


def still(duration: float) -> MotionSegment:
    return MotionSegment(duration)


@dataclass(frozen=True)
class SynthSpec:
    duration: float
    segments: tuple[MotionSegment, ...]
    noise_std: tuple[float, ...] = (0.0,) * 6
    gyro_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    seed: int = 0
    rate: float = DEFAULT_RATE
    start: Pose2D = field(default_factory=Pose2D)
    blend: float = 0.3  # seconds; speed / turn-rate steps are smoothed over this span

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "noise_std", tuple(float(v) for v in self.noise_std))
        object.__setattr__(self, "gyro_bias", tuple(float(v) for v in self.gyro_bias))
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        if not self.segments:
            raise ValueError("need at least one motion segment")
        if len(self.noise_std) != 6 or min(self.noise_std) < 0:
            raise ValueError("noise_std must be six non-negative values")
        if len(self.gyro_bias) != 3:
            raise ValueError("gyro_bias must be a 3-vector")
        if self.rate <= 0 or self.blend < 0:
            raise ValueError("rate must be > 0 and blend >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start"] = [self.start.x, self.start.y, self.start.psi]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SynthSpec:
        d = dict(d)
        d["segments"] = tuple(MotionSegment(**s) for s in d["segments"])
        if "start" in d:
            d["start"] = Pose2D(*d["start"])
        return cls(**d)


def _profile(spec: SynthSpec, n: int) -> dict[str, np.ndarray]:
    """Per-sample segment parameters; the last segment extends to the end."""
    t = np.arange(n) / spec.rate
    bounds = np.cumsum([s.duration for s in spec.segments])
    idx = np.minimum(np.searchsorted(bounds, t, side="right"), len(spec.segments) - 1)
    cols = {k: np.array([getattr(s, k) for s in spec.segments])[idx]
            for k in ("speed", "turn_rate", "gait_freq", "gait_amp", "vibration")}
    hw = int(round(spec.blend * spec.rate / 2))
    if hw > 0 and len(spec.segments) > 1:
        for k in ("speed", "turn_rate", "gait_amp"):
            cols[k] = moving_average(cols[k], hw)
    return cols


def synth(spec: SynthSpec) -> tuple[ImuSequence, GroundTruth]:
    """Simulate one recording: IMU readings and per-sample ground truth."""
    dt = 1.0 / spec.rate
    n = int(round(spec.duration * spec.rate)) + 1
    t = np.arange(n) * dt
    prof = _profile(spec, n)
    v, w = prof["speed"], prof["turn_rate"]

    # trapezoidal integration of heading and position
    psi = spec.start.psi + np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * dt)])
    vx, vy = v * np.cos(psi), v * np.sin(psi)
    x = spec.start.x + np.concatenate([[0.0], np.cumsum(0.5 * (vx[1:] + vx[:-1]) * dt)])
    y = spec.start.y + np.concatenate([[0.0], np.cumsum(0.5 * (vy[1:] + vy[:-1]) * dt)])

    # body-frame specific force: tangential, centripetal, gravity, gait bounce
    dv = np.gradient(v, dt) if n > 1 else np.zeros(n)
    phase = 2.0 * np.pi * np.concatenate([[0.0], np.cumsum(0.5 * (prof["gait_freq"][1:] + prof["gait_freq"][:-1]) * dt)])
    accel = np.stack([dv, v * w, GRAVITY + prof["gait_amp"] * np.sin(phase)], axis=1)
    gyro = np.zeros((n, 3))
    gyro[:, 2] = w
    gyro += np.asarray(spec.gyro_bias)

    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((n, 6)) * np.asarray(spec.noise_std)
    vib = rng.standard_normal((n, 3)) * (prof["vibration"] * v)[:, None]
    accel = accel + noise[:, :3] + vib
    gyro = gyro + noise[:, 3:]

    imu = ImuSequence(t, accel, gyro, nominal_rate=spec.rate)
    gt = GroundTruth(t, np.stack([x, y, np.zeros(n)], axis=1), yaw_quat(psi))
    return imu, gt


# --------------------------------------------------------------------------
# corpora


PHONE_NOISE = (0.05, 0.05, 0.05, 0.005, 0.005, 0.005)


def random_spec(rng: np.random.Generator, duration: float = 60.0, speeds: Sequence[float] = (0.5, 1.0, 1.5),
                wheeled: bool = False, speed_jitter: float = 0.1, max_turn: float = 0.6,
                segment_range: tuple[float, float] = (6.0, 15.0), seed: int | None = None) -> SynthSpec:
    """A random walk (or trolley push) alternating straight stretches and turns
    at one speed tier, with per-segment speed jitter."""
    tier = float(rng.choice(np.asarray(speeds)))
    segments, total = [], 0.0
    while total < duration:
        d = float(rng.uniform(*segment_range))
        speed = tier * (1.0 + float(rng.uniform(-speed_jitter, speed_jitter)))
        turn = 0.0 if rng.random() < 0.4 else float(rng.uniform(-max_turn, max_turn))
        segments.append(trolley(d, speed, turn) if wheeled else walking(d, speed, turn))
        total += d
    bias = tuple(float(b) for b in rng.normal(0.0, 0.002, 3))
    return SynthSpec(duration, tuple(segments), PHONE_NOISE, bias,
                     seed=int(rng.integers(2**31)) if seed is None else seed,
                     start=Pose2D(0.0, 0.0, float(rng.uniform(-np.pi, np.pi))))


def random_corpus(n_sequences: int, seed: int = 0, duration: float = 60.0,
                  trolley_fraction: float = 0.25, **kwargs) -> list[SynthSpec]:
    rng = np.random.default_rng(seed)
    n_trolley = int(round(trolley_fraction * n_sequences))
    return [random_spec(rng, duration, wheeled=i < n_trolley, **kwargs) for i in range(n_sequences)]


def write_imu_csv(imu: ImuSequence, path: str | Path) -> None:
    data = np.column_stack([imu.t, imu.accel, imu.gyro])
    np.savetxt(path, data, delimiter=",", fmt="%.17g", header="t,ax,ay,az,gx,gy,gz", comments="")


def write_gt_csv(gt: GroundTruth, path: str | Path) -> None:
    data = np.column_stack([gt.t, gt.position, gt.orientation])
    np.savetxt(path, data, delimiter=",", fmt="%.17g", header="t,x,y,z,qw,qx,qy,qz", comments="")


def write_corpus(specs: Sequence[SynthSpec], out_dir: str | Path, window: WindowConfig = WindowConfig(),
                 split_seed: int = 0, split_ratio: float = 0.8) -> Manifest:
    """Simulate each spec into ``imu_XXX.csv`` / ``gt_XXX.csv`` plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, spec in enumerate(specs):
        imu, gt = synth(spec)
        names = {"imu": f"imu_{i:03d}.csv", "gt": f"gt_{i:03d}.csv"}
        write_imu_csv(imu, out / names["imu"])
        write_gt_csv(gt, out / names["gt"])
        entries.append(names)
    manifest = Manifest(entries, ColumnMap(), window, split_seed, split_ratio, specs[0].rate, out)
    manifest.write(out / "manifest.json")
    (out / "specs.json").write_text(json.dumps([s.to_dict() for s in specs], indent=1, sort_keys=True) + "\n")
    return manifest
