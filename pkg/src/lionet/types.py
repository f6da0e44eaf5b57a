"""Domain types and planar geometry helpers shared by every module.

IMU data is stored array-backed (``ImuSequence`` holds ``(N,)`` and ``(N, 3)``
arrays) because per-sample objects are far too slow for hour-long recordings;
``ImuSample`` is still available for single readings and iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

GRAVITY = 9.80665
DEFAULT_RATE = 100.0

#: channel order of every window: accel x, y, z then gyro x, y, z
CHANNELS = ("ax", "ay", "az", "gx", "gy", "gz")


def wrap_angle(theta: float) -> float:
    """Map ``theta`` to the representative in (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"cannot wrap non-finite angle {theta!r}")
    r = math.remainder(theta, 2.0 * math.pi)  # in [-pi, pi]
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorised :func:`wrap_angle`."""
    theta = np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(theta)):
        raise ValueError("cannot wrap non-finite angles")
    r = np.remainder(theta, 2.0 * np.pi)
    r = np.where(r > np.pi, r - 2.0 * np.pi, r)
    return r


def _check_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class ImuSample:
    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]
    mag: tuple[float, float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "accel", tuple(float(v) for v in self.accel))
        object.__setattr__(self, "gyro", tuple(float(v) for v in self.gyro))
        if len(self.accel) != 3 or len(self.gyro) != 3:
            raise ValueError("accel and gyro must be 3-vectors")
        _check_finite("ImuSample", self.t, *self.accel, *self.gyro)
        if self.mag is not None:
            object.__setattr__(self, "mag", tuple(float(v) for v in self.mag))
            _check_finite("ImuSample.mag", *self.mag)
        if self.t < 0:
            raise ValueError("timestamp must be >= 0")


@dataclass(frozen=True, eq=False)
class ImuSequence:
    """Ordered IMU readings.

    ``t`` is ``(N,)`` seconds, ``accel``/``gyro`` are ``(N, 3)``; ``mag`` is
    optional and carried through but never used by the odometry code.
    """

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray
    mag: np.ndarray | None = None
    nominal_rate: float = DEFAULT_RATE

    def __post_init__(self):
        t = np.ascontiguousarray(self.t, dtype=np.float64).reshape(-1)
        accel = np.ascontiguousarray(self.accel, dtype=np.float64).reshape(-1, 3)
        gyro = np.ascontiguousarray(self.gyro, dtype=np.float64).reshape(-1, 3)
        if len(t) < 1:
            raise ValueError("ImuSequence needs at least one sample")
        if not (len(t) == len(accel) == len(gyro)):
            raise ValueError("t, accel and gyro lengths differ")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(accel)) and np.all(np.isfinite(gyro))):
            raise ValueError("IMU data must be finite")
        if t[0] < 0:
            raise ValueError("timestamps must be >= 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if self.nominal_rate <= 0:
            raise ValueError("nominal_rate must be positive")
        for name, arr in (("t", t), ("accel", accel), ("gyro", gyro)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mag is not None:
            mag = np.ascontiguousarray(self.mag, dtype=np.float64).reshape(-1, 3)
            if len(mag) != len(t):
                raise ValueError("mag length differs from t")
            mag.setflags(write=False)
            object.__setattr__(self, "mag", mag)

    @classmethod
    def from_samples(cls, samples: Sequence[ImuSample], nominal_rate: float = DEFAULT_RATE) -> ImuSequence:
        mag = None
        if samples and all(s.mag is not None for s in samples):
            mag = [s.mag for s in samples]
        return cls(
            t=[s.t for s in samples],
            accel=[s.accel for s in samples],
            gyro=[s.gyro for s in samples],
            mag=mag,
            nominal_rate=nominal_rate,
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> ImuSample:
        mag = None if self.mag is None else tuple(self.mag[i])
        return ImuSample(float(self.t[i]), tuple(self.accel[i]), tuple(self.gyro[i]), mag)

    def __iter__(self) -> Iterator[ImuSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def samples(self) -> list[ImuSample]:
        return list(self)

    def channels(self) -> np.ndarray:
        """``(N, 6)`` matrix in canonical channel order."""
        return np.concatenate([self.accel, self.gyro], axis=1)

    def slice(self, start: int, stop: int) -> ImuSequence:
        mag = None if self.mag is None else self.mag[start:stop]
        return ImuSequence(self.t[start:stop], self.accel[start:stop], self.gyro[start:stop], mag, self.nominal_rate)


@dataclass(frozen=True)
class WindowConfig:
    n: int = 200
    stride: int = 10

    def __post_init__(self):
        if self.n < 1 or not (1 <= self.stride <= self.n):
            raise ValueError(f"need 1 <= stride <= n, got n={self.n} stride={self.stride}")

    @property
    def chains(self) -> int:
        """Number of independent reconstruction chains (n / stride)."""
        return -(-self.n // self.stride)


@dataclass(frozen=True, eq=False)
class Window:
    data: np.ndarray
    start_index: int = 0
    normalized: bool = False

    def __post_init__(self):
        data = np.array(self.data)
        if data.dtype != np.float32:
            data = data.astype(np.float64)
        if data.ndim != 2 or data.shape[1] != 6:
            raise ValueError(f"window data must be (n, 6), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("window data must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class PolarDelta:
    dl: float
    dpsi: float

    def __post_init__(self):
        _check_finite("PolarDelta", self.dl, self.dpsi)
        if self.dl < 0:
            raise ValueError(f"dl must be >= 0, got {self.dl}")
        object.__setattr__(self, "dl", float(self.dl))
        object.__setattr__(self, "dpsi", wrap_angle(float(self.dpsi)))


@dataclass(frozen=True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        _check_finite("Pose2D", self.x, self.y, self.psi)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "psi", wrap_angle(float(self.psi)))

    @classmethod
    def parse(cls, text: str) -> Pose2D:
        """Parse ``"x,y,psi"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'x,y,psi', got {text!r}")
        return cls(*(float(p) for p in parts))


def advance_pose(p0: Pose2D, delta: PolarDelta) -> Pose2D:
    """Move ``delta.dl`` metres along heading ``p0.psi + delta.dpsi``."""
    heading = p0.psi + delta.dpsi
    return Pose2D(
        p0.x + delta.dl * math.cos(heading),
        p0.y + delta.dl * math.sin(heading),
        wrap_angle(heading),
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timestamped planar poses, stored column-wise."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        cols = [np.ascontiguousarray(getattr(self, k), dtype=np.float64).reshape(-1) for k in ("t", "x", "y", "psi")]
        if len({len(c) for c in cols}) != 1:
            raise ValueError("trajectory columns differ in length")
        if np.any(np.diff(cols[0]) < 0):
            raise ValueError("trajectory timestamps must be non-decreasing")
        cols[3] = wrap_angles(cols[3]) if len(cols[3]) else cols[3]
        for name, arr in zip(("t", "x", "y", "psi"), cols):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_poses(cls, times: Sequence[float], poses: Sequence[Pose2D]) -> Trajectory:
        return cls(
            np.asarray(times, dtype=float),
            np.array([p.x for p in poses], dtype=float),
            np.array([p.y for p in poses], dtype=float),
            np.array([p.psi for p in poses], dtype=float),
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> tuple[float, Pose2D]:
        return float(self.t[i]), Pose2D(self.x[i], self.y[i], self.psi[i])

    def __iter__(self) -> Iterator[tuple[float, Pose2D]]:
        for i in range(len(self)):
            yield self[i]

    @property
    def xy(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=1)


@dataclass(frozen=True)
class VelocityEstimate:
    v_bar: float
    psi_dot: float

    def __post_init__(self):
        if self.v_bar < 0:
            raise ValueError("v_bar must be >= 0")


__all__ = [
    "CHANNELS",
    "DEFAULT_RATE",
    "GRAVITY",
    "ImuSample",
    "ImuSequence",
    "PolarDelta",
    "Pose2D",
    "Trajectory",
    "VelocityEstimate",
    "Window",
    "WindowConfig",
    "advance_pose",
    "wrap_angle",
    "wrap_angles",
]
