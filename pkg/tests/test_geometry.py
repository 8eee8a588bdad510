import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from builders import agent, ca
from oracles import direct_gap, grid_min
from trajinteract.errors import InvalidInputError
from trajinteract.geometry import (DEGENERATE_EPS, Pose, ca_propagate, check_sanity, clamp_tau,
                                   closest_approach_time, closest_distance, from_relative_frame,
                                   real_cubic_roots, squared_gap, to_relative_frame)
from trajinteract.state import Vec2, wrap_angle

finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("s, tau, expected", [
    (ca((0, 0), (1, 0)), 3.0, (3.0, 0.0)),
    (ca((0, 0), (0, 0), (2, 0)), 2.0, (4.0, 0.0)),
    (ca((1, 1), (1, -1), (0, 2)), 1.0, (2.0, 1.0)),
])
def test_ca_propagate_examples(s, tau, expected):
    assert ca_propagate(s, tau).as_tuple() == expected


def test_ca_propagate_rejects_negative_tau():
    with pytest.raises(InvalidInputError):
        ca_propagate(ca(), -0.5)
    with pytest.raises(InvalidInputError):
        ca_propagate(ca(), math.nan)


def test_closest_approach_head_on():
    assert closest_approach_time(ca(), ca((10, 0), (-1, 0))) == pytest.approx(10.0, abs=1e-12)


def test_closest_approach_static_pair_is_zero():
    assert closest_approach_time(ca(), ca((3, 4))) == 0.0


def _oracle_tau(px, py, vx, vy, ax, ay):
    """Grid minimiser with the tie convention: the earliest non-negative tied minimum wins."""
    tau_all, q_all = grid_min(px, py, vx, vy, ax, ay)
    tau_fut, q_fut = grid_min(px, py, vx, vy, ax, ay, 0.0, 60.0)
    return tau_fut if q_fut <= q_all + 1e-9 * max(1.0, q_all) else tau_all


def test_closest_approach_accelerating_matches_grid():
    # frozen from the grid oracle: +-sqrt(2) both give q = 3 and tie
    _, q_oracle = grid_min(0.0, 2.0, 1.0, 0.0, 0.0, -1.0)
    assert q_oracle == pytest.approx(3.0, abs=1e-9)
    tau_oracle = _oracle_tau(0.0, 2.0, 1.0, 0.0, 0.0, -1.0)
    tau = closest_approach_time(ca(), ca((0, 2), (1, 0), (0, -1)))
    assert abs(tau - tau_oracle) < 1e-3
    assert tau == pytest.approx(math.sqrt(2), abs=1e-9)


def test_double_meeting_prefers_future_root():
    # collinear pair whose gap vanishes at tau = -2 and tau = 8
    other = ca((16, 0), (6, 0), (-2, 0))
    assert closest_approach_time(ca(), other) == pytest.approx(8.0, abs=1e-9)


def test_closest_approach_rotation_stable():
    rng = np.random.default_rng(0)
    other = ca((16, 0), (6, 0), (-2, 0))
    for angle in rng.uniform(-math.pi, math.pi, 50):
        rot = ca(other.position.rotated(angle).as_tuple(), other.velocity.rotated(angle).as_tuple(),
                 other.acceleration.rotated(angle).as_tuple())
        assert closest_approach_time(ca(), rot) == pytest.approx(8.0, abs=1e-6)


def test_tiny_acceleration_uses_linear_fallback():
    # |da|^2 below 1e-12: the linear closed form applies, here with dv = 0 so tau = 0
    assert closest_approach_time(ca(), ca((0, 1), (0, 0), (0, 5e-7))) == 0.0
    assert closest_approach_time(ca(), ca((10, 0), (-1, 0), (0, 5e-7))) == pytest.approx(10.0, abs=1e-12)


def test_cubic_roots_known():
    roots = real_cubic_roots(1.0, -6.0, 11.0, -6.0)
    assert roots == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)
    assert real_cubic_roots(1.0, 0.0, 1.0, 0.0) == pytest.approx([0.0], abs=1e-15)


@pytest.mark.parametrize("tau, expected", [(-1.0, 0.0), (31.0, 30.0), (5.0, 5.0)])
def test_clamp_examples(tau, expected):
    assert clamp_tau(tau, 30.0) == expected


def test_clamp_rejects_bad_horizon():
    with pytest.raises(InvalidInputError):
        clamp_tau(1.0, 0.0)


def test_closest_distance_examples():
    assert closest_distance(ca(), ca((10, 0), (-1, 0)), 10.0) == 0.0
    assert closest_distance(ca(), ca((3, 4), (1, 1)), 0.0) == 5.0


def test_closest_distance_accelerating_direct_arithmetic():
    dp, dv, da = (0, 2), (1, 0), (0, -1)
    other = ca(dp, dv, da)
    tau = clamp_tau(closest_approach_time(ca(), other), 30.0)
    assert closest_distance(ca(), other, tau) == pytest.approx(direct_gap(dp, dv, da, math.sqrt(2)), abs=1e-9)
    assert closest_distance(ca(), other, 1.7) == pytest.approx(direct_gap(dp, dv, da, 1.7), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[finite] * 6), st.tuples(*[finite] * 6))
def test_closest_approach_is_stationary_minimum(a, b):
    t, o = ca(a[:2], a[2:4], a[4:]), ca(b[:2], b[2:4], b[4:])
    da2 = (b[4] - a[4]) ** 2 + (b[5] - a[5]) ** 2
    dv2 = (b[2] - a[2]) ** 2 + (b[3] - a[3]) ** 2
    # below the degeneracy thresholds the solver falls back to the linear / static convention
    assume((da2 >= DEGENERATE_EPS or da2 == 0.0) and (da2 > 0.0 or dv2 >= DEGENERATE_EPS or dv2 == 0.0))
    tau = closest_approach_time(t, o)
    q = squared_gap(t, o, tau)
    for probe in (tau - 1e-3, tau + 1e-3, 0.0, 5.0, -5.0):
        assert q <= squared_gap(t, o, probe) * (1 + 1e-9) + 1e-9


def test_relative_frame_anchor_maps_to_origin():
    s = agent(1, (5.0, -2.0), (3.0, 4.0))
    rel = to_relative_frame(s, Pose.of(s))
    assert rel.position.norm() < 1e-12 and abs(rel.heading) < 1e-12


def test_relative_frame_zero_heading_translates():
    s = agent(1, (5.0, -2.0), (3.0, 4.0), (1.0, 0.0))
    rel = to_relative_frame(s, Pose(Vec2(1.0, 1.0), 0.0))
    assert rel.position.as_tuple() == (4.0, -3.0)
    assert rel.velocity == s.velocity and rel.acceleration == s.acceleration


@settings(max_examples=200, deadline=None)
@given(st.tuples(*[finite] * 6), finite, finite, st.floats(-math.pi, math.pi))
def test_relative_frame_round_trip(vals, ox, oy, heading):
    s = agent(3, vals[:2], vals[2:4], vals[4:])
    pose = Pose(Vec2(ox, oy), heading)
    back = from_relative_frame(to_relative_frame(s, pose), pose)
    keep = [0, 1, 3, 4, 5, 6]  # heading compared modulo 2*pi below
    np.testing.assert_allclose(np.asarray(back.as_array())[keep], np.asarray(s.as_array())[keep], atol=1e-9)
    assert abs(wrap_angle(back.heading - s.heading)) < 1e-9


def test_sanity_limits():
    check_sanity(Vec2(30.0, 0.0), Vec2(1.0, 0.0))
    with pytest.raises(InvalidInputError, match="speed"):
        check_sanity(Vec2(900.0, 0.0), Vec2(0.0, 0.0))


def test_wrap_angle_range():
    assert wrap_angle(-math.pi) == math.pi
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert -math.pi < wrap_angle(-3 * math.pi / 2) <= math.pi
