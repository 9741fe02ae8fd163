import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import oracles
from beamsense.errors import DomainError, FormatError
from beamsense.mobility import (DEFAULT_PROFILES, ActivityProfile, Route, Trajectory, discretize,
                                discretize_arrays, l_route, random_waypoint, read_route_csv,
                                synthesize_array, synthesize_corpus, synthesize_trace,
                                write_route_csv)
from beamsense.sensing import ActivityClass

ROOM = (10.0, 10.0)
coord = st.floats(0.0, 10.0, allow_nan=False)


def test_discretize_short_segment():
    steps = discretize(Route(((1, 1), (1, 2)), step_len=0.1), ROOM)
    assert len(steps) == 11
    assert all(s.heading == 0.0 for s in steps)
    assert steps[-1].position == pytest.approx((1.0, 2.0))


def test_discretize_l_route_headings():
    traj = discretize_arrays(Route(((1, 1), (1, 5), (5, 5))), ROOM)
    corner = int(np.argmin(np.hypot(traj.positions[:, 0] - 1, traj.positions[:, 1] - 5)))
    assert np.all(traj.headings[: corner + 1] == 0.0)
    assert_allclose(traj.headings[corner + 1:], math.pi / 2)


def test_discretize_time_step():
    steps = discretize(Route(((0, 0), (3, 0)), speed=1.0, step_len=0.1))
    dt = np.diff([s.t for s in steps])
    assert_allclose(dt, 0.1)
    assert steps[-1].t == pytest.approx(3.0)


def test_discretize_rejects_outside_waypoints():
    with pytest.raises(DomainError):
        discretize(Route(((1, 1), (11, 1))), ROOM)


def test_route_invariants():
    with pytest.raises(DomainError):
        Route(((1, 1),))
    with pytest.raises(DomainError):
        Route(((1, 1), (2, 2)), speed=0)
    with pytest.raises(DomainError):
        Route(((1, 1), (2, 2)), step_len=-1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=2, max_size=8), st.floats(0.05, 1.0))
@example([(0.0, 0.0), (0.0, 1e-274)], 1.0)
def test_discretized_path_length(points, step):
    route = Route(tuple(points), step_len=step)
    traj = discretize_arrays(route, ROOM)
    walked = float(np.sum(np.hypot(*np.diff(traj.positions, axis=0).T)))
    assert abs(walked - route.length) <= step + 1e-9
    assert np.all(np.diff(traj.times) > 0) or len(traj) == 1
    hops = np.hypot(*np.diff(traj.positions, axis=0).T)
    assert np.all(hops <= step + 1e-9)
    assert np.all((traj.headings >= 0) & (traj.headings < 2 * math.pi))


def test_random_waypoint_deterministic_and_inset():
    a = random_waypoint(ROOM, 100, 42)
    b = random_waypoint(ROOM, 100, 42)
    assert a == b
    assert len(a.waypoints) == 100
    pts = np.asarray(a.waypoints)
    assert pts.min() >= 0.1 and pts.max() <= 9.9
    assert random_waypoint(ROOM, 100, 43) != a


def test_random_waypoint_needs_two_points():
    with pytest.raises(DomainError):
        random_waypoint(ROOM, 1, 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rwpm_trajectories_stay_inside(seed):
    traj = discretize_arrays(random_waypoint(ROOM, 10, seed), ROOM)
    p = traj.positions
    assert p.min() >= 0.0 and p[:, 0].max() <= 10.0 and p[:, 1].max() <= 10.0


def test_route_csv_roundtrip(tmp_path):
    r = Route(((1.5, 2.0), (3.25, 4.0), (9.0, 9.0)))
    write_route_csv(tmp_path / "r.csv", r)
    assert read_route_csv(tmp_path / "r.csv") == r
    (tmp_path / "noheader.csv").write_text("1,1\n2,2\n")
    assert read_route_csv(tmp_path / "noheader.csv").waypoints == ((1, 1), (2, 2))


def test_route_csv_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("x,y\n1,1\n2,b\n")
    with pytest.raises(FormatError) as info:
        read_route_csv(tmp_path / "bad.csv")
    assert info.value.line == 3
    (tmp_path / "one.csv").write_text("x,y\n1,1\n")
    with pytest.raises(FormatError):
        read_route_csv(tmp_path / "one.csv")


def test_bundled_route_is_an_l():
    r = l_route()
    assert r.waypoints == ((1.0, 1.0), (1.0, 9.0), (9.0, 9.0))


def test_trajectory_steps_roundtrip():
    traj = discretize_arrays(l_route(), ROOM)
    again = Trajectory.from_steps(traj.steps())
    assert_allclose(again.positions, traj.positions)
    assert_allclose(again.headings, traj.headings)


# -- synthetic traces -------------------------------------------------------

def test_still_noiseless():
    samples = synthesize_trace(ActivityProfile(ActivityClass.STILL), 1.0, 100, 0)
    assert len(samples) == 100
    assert all(s.accel == (0.0, 0.0, 9.81) and s.gyro == (0.0, 0.0, 0.0) for s in samples)


def test_turning_integrates_azimuth():
    arr = synthesize_array(ActivityProfile(ActivityClass.TURNING, turn_rate=1.0), 2.0, 100, 0,
                           initial_azimuth=0.3)
    assert arr[-1, 7] == pytest.approx((0.3 + 2.0) % (2 * math.pi), abs=1e-9)
    assert_allclose(arr[:, 6], 1.0)


def test_straight_autocorrelation_at_step_period():
    prof = ActivityProfile(ActivityClass.STRAIGHT, accel_noise_std=0.3, step_freq=2.0, step_amp=1.5)
    arr = synthesize_array(prof, 10.0, 100, 5)
    az = list(arr[:, 3])
    r_half_second = oracles.autocorr_lag(az, 50)
    assert r_half_second >= 0.8
    assert max(oracles.autocorr_lag(az, lag) for lag in range(45, 56)) >= 0.8


def test_synthesis_deterministic_per_seed():
    prof = DEFAULT_PROFILES[ActivityClass.TURNING_AND_MOVING]
    a = synthesize_array(prof, 5, 100, 11)
    assert np.array_equal(a, synthesize_array(prof, 5, 100, 11))
    assert not np.array_equal(a, synthesize_array(prof, 5, 100, 12))


def test_synthesis_preconditions():
    with pytest.raises(DomainError):
        synthesize_array(DEFAULT_PROFILES[ActivityClass.STILL], 0, 100, 0)
    with pytest.raises(DomainError):
        ActivityProfile(ActivityClass.STRAIGHT, step_amp=1.0)
    with pytest.raises(DomainError):
        ActivityProfile(ActivityClass.STILL, accel_noise_std=-1)


def test_corpus_has_all_classes():
    corpus = synthesize_corpus(duration=2.0, rate=100, seed=3)
    assert set(corpus) == set(ActivityClass)
    assert all(arr.shape == (200, 10) for arr in corpus.values())
