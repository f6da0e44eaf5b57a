"""Inertial odometry: L-IONet, IONet and PDR with sliding-window reconstruction."""

from .errors import ConfigMismatchError, DataError, LionetError, ModelFormatError, NumericalError, StatsMismatchError
from .types import (
    GRAVITY,
    ImuSample,
    ImuSequence,
    PolarDelta,
    Pose2D,
    Trajectory,
    VelocityEstimate,
    Window,
    WindowConfig,
    advance_pose,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigMismatchError", "DataError", "LionetError", "ModelFormatError", "NumericalError", "StatsMismatchError",
    "GRAVITY", "ImuSample", "ImuSequence", "PolarDelta", "Pose2D", "Trajectory", "VelocityEstimate", "Window",
    "WindowConfig", "advance_pose", "wrap_angle",
]
