import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lionet.types import (
    ImuSample,
    ImuSequence,
    PolarDelta,
    Pose2D,
    Trajectory,
    Window,
    WindowConfig,
    advance_pose,
    wrap_angle,
    wrap_angles,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
angles = st.floats(-50.0, 50.0, allow_nan=False)


@pytest.mark.parametrize("theta, expected", [
    (0.0, 0.0),
    (3 * math.pi / 2, -math.pi / 2),
    (-math.pi, math.pi),
    (math.pi, math.pi),
])
def test_wrap_angle_examples(theta, expected):
    assert wrap_angle(theta) == pytest.approx(expected, abs=1e-12)


@given(angles)
def test_wrap_angle_range_and_congruence(theta):
    w = wrap_angle(theta)
    assert -math.pi < w <= math.pi
    k = (theta - w) / (2 * math.pi)
    assert abs(k - round(k)) < 1e-9


@given(st.lists(angles, min_size=1, max_size=20))
def test_wrap_angles_matches_scalar(thetas):
    np.testing.assert_allclose(wrap_angles(np.array(thetas)), [wrap_angle(t) for t in thetas], atol=1e-12)


def test_advance_pose_examples():
    assert advance_pose(Pose2D(), PolarDelta(0.0, 0.0)) == Pose2D()
    p = advance_pose(Pose2D(), PolarDelta(1.0, 0.0))
    assert (p.x, p.y, p.psi) == pytest.approx((1.0, 0.0, 0.0))


def test_advance_pose_hand_evaluation():
    # x1 = 1 + 2 cos(pi/2 + pi/2) = -1, y1 = 1 + 2 sin(pi) = 1
    p = advance_pose(Pose2D(1.0, 1.0, math.pi / 2), PolarDelta(2.0, math.pi / 2))
    assert p.x == pytest.approx(-1.0, abs=1e-12)
    assert p.y == pytest.approx(1.0, abs=1e-12)
    assert p.psi == pytest.approx(math.pi, abs=1e-12)


@given(finite, finite, angles, st.floats(0, 10), angles)
def test_advance_pose_moves_dl_and_wraps(x, y, psi, dl, dpsi):
    p = advance_pose(Pose2D(x, y, psi), PolarDelta(dl, dpsi))
    assert math.hypot(p.x - x, p.y - y) == pytest.approx(dl, abs=1e-9)
    assert -math.pi < p.psi <= math.pi


def test_polar_delta_rejects_negative_length():
    with pytest.raises(ValueError):
        PolarDelta(-0.1, 0.0)


def test_pose_parse():
    p = Pose2D.parse("1.5, -2, 0.25")
    assert (p.x, p.y, p.psi) == (1.5, -2.0, 0.25)
    with pytest.raises(ValueError):
        Pose2D.parse("1,2")


def test_imu_sequence_validation():
    t = np.arange(5) * 0.01
    seq = ImuSequence(t, np.zeros((5, 3)), np.zeros((5, 3)))
    assert len(seq) == 5 and seq.channels().shape == (5, 6)
    with pytest.raises(ValueError):
        ImuSequence(t[::-1], np.zeros((5, 3)), np.zeros((5, 3)))
    with pytest.raises(ValueError):
        ImuSequence(t, np.zeros((4, 3)), np.zeros((5, 3)))


def test_imu_sequence_from_samples_round_trip():
    samples = [ImuSample(0.01 * i, (0.0, 0.0, 9.8), (0.0, 0.0, 0.1 * i)) for i in range(4)]
    seq = ImuSequence.from_samples(samples)
    assert list(seq)[2].gyro[2] == pytest.approx(0.2)


def test_window_config_chains():
    assert WindowConfig().chains == 20
    with pytest.raises(ValueError):
        WindowConfig(200, 0)


def test_window_shape_checked():
    Window(np.zeros((200, 6)), 0)
    with pytest.raises(ValueError):
        Window(np.zeros((200, 5)), 0)


def test_trajectory_from_poses():
    tr = Trajectory.from_poses([0.0, 0.1], [Pose2D(), Pose2D(1.0, 2.0, 0.5)])
    assert len(tr) == 2
    np.testing.assert_array_equal(tr.xy[1], [1.0, 2.0])
