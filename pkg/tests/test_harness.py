import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from beamsense.errors import DomainError
from beamsense.harness import (SWEEP_COLUMNS, REBEAMFORM_KINDS, PreparedRoute,
                               classify_and_identify, power_drop_flags, route_seeds, run_route,
                               run_rwpm_sweep, simulate, sweep_to_csv)
from beamsense.mobility import (DEFAULT_PROFILES, ActivityProfile, Route, Trajectory,
                                discretize_arrays, l_route, random_waypoint, synthesize_array,
                                synthesize_corpus)
from beamsense.prediction import PredictorKind
from beamsense.propagation import Scenario, best_sector
from beamsense.sensing import ActivityClass, ErrorCause, feature_matrix, train, window

ROOM = (10.0, 10.0)
KINDS = list(PredictorKind)


def walk(*points, step=0.1):
    return discretize_arrays(Route(tuple(points), step_len=step), ROOM)


def test_stationary_user_has_no_events(scenario):
    traj = Trajectory(np.tile([[3.3, 7.1]], (50, 1)), np.zeros(50), np.arange(50) * 0.1)
    for kind in KINDS:
        report = run_route(scenario, traj, kind)
        assert report.events == ()
        assert np.all(report.power_trace == report.power_trace[0])


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("p_dth", [1.0, 3.0, 6.0])
def test_straight_walk_matches_reference_tracker(scenario, kind, p_dth):
    traj = walk((0.5, 5.0), (9.5, 5.0))
    sc = replace(scenario, p_dth=p_dth)
    report = run_route(sc, traj, kind)
    rebeam, switch = oracles.track(traj.positions.tolist(), traj.headings.tolist(), kind.value, p_dth)
    assert (report.rebeamform_count, report.beam_switch_count) == (rebeam, switch)


def test_straight_walk_counts(scenario):
    traj = walk((0.5, 5.0), (9.5, 5.0))
    none = run_route(scenario, traj, PredictorKind.NONE)
    sensor = run_route(scenario, traj, PredictorKind.SENSOR)
    assert none.rebeamform_count >= 4
    assert none.beam_switch_count == 0
    assert sensor.beam_switch_count >= 4
    assert sensor.rebeamform_count < none.rebeamform_count


def test_l_route_counts(scenario):
    traj = discretize_arrays(l_route(), ROOM)
    counts = [run_route(scenario, traj, k).rebeamform_count for k in KINDS]
    assert counts[0] > counts[1] > counts[2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(KINDS), st.booleans(), st.floats(0.5, 10.0))
def test_report_invariants(seed, kind, validate, p_dth):
    sc = Scenario(p_dth=p_dth)
    traj = discretize_arrays(random_waypoint(ROOM, 6, seed), ROOM)
    report = run_route(sc, traj, kind, use_validation=validate)
    n_events = len(report.events)
    assert report.rebeamform_count + report.beam_switch_count == n_events
    assert report.predictor_invocations + report.forced_count == n_events
    assert 0.0 <= report.rebeamform_pct <= 100.0
    assert np.all(report.power_trace > sc.p_rth)
    for e in report.events:
        x, y = report.positions[e.step_index]
        if e.kind in REBEAMFORM_KINDS:
            assert e.to_sector == best_sector(sc, (x, y))
        assert tuple(report.sectors[e.step_index]) == (e.to_sector.x, e.to_sector.y)
        assert report.power_trace[e.step_index] == e.rx_power_after
    if kind is PredictorKind.NONE:
        assert report.beam_switch_count == 0


def test_strict_mode_power_does_not_depend_on_predictor(scenario):
    traj = discretize_arrays(random_waypoint(ROOM, 20, 5), ROOM)
    traces = [run_route(scenario, traj, k).power_trace for k in KINDS]
    assert np.array_equal(traces[0], traces[1]) and np.array_equal(traces[0], traces[2])


def test_report_serialisation_is_deterministic(scenario):
    traj = discretize_arrays(l_route(), ROOM)
    a = run_route(scenario, traj, PredictorKind.SENSOR)
    b = run_route(scenario, traj, PredictorKind.SENSOR)
    assert a.to_json() == b.to_json()
    assert a.to_csv() == b.to_csv()
    doc = json.loads(a.to_json())
    assert doc["summary"]["rebeamform_count"] == a.rebeamform_count
    assert len(doc["power_trace_dbm"]) == a.n_steps
    rows = a.to_csv().splitlines()
    assert rows[0] == "step,x,y,sector_x,sector_y,rx_power_dbm,event"
    assert len(rows) == a.n_steps + 1


def test_outside_step_is_reported(scenario):
    traj = Trajectory(np.array([[1.0, 1.0], [2.0, 2.0], [2.0, 10.5]]), np.zeros(3), np.arange(3) * 0.1)
    with pytest.raises(DomainError) as info:
        run_route(scenario, traj, PredictorKind.NONE)
    assert info.value.step_index == 2


@pytest.mark.parametrize("validate", [False, True])
def test_sensor_dominates_none_per_route(scenario, validate):
    room = ROOM
    worse = total = 0
    for p_dth in (1.0, 3.0, 5.0, 8.0):
        sc = replace(scenario, p_dth=p_dth)
        for seed in route_seeds(7, 25):
            prepared = PreparedRoute.build(sc, discretize_arrays(random_waypoint(room, 20, seed), room))
            none = simulate(sc, prepared, PredictorKind.NONE, validate)
            sensor = simulate(sc, prepared, PredictorKind.SENSOR, validate)
            worse += sensor.rebeamform_count > none.rebeamform_count
            total += 1
    assert worse <= 0.05 * total


# -- sweep ------------------------------------------------------------------

def test_sweep_single_route_matches_run_route(scenario):
    route = random_waypoint(ROOM, 10, 3)
    results = run_rwpm_sweep(scenario, repetitions=1, p_dth_values=[2.0, 5.0], routes=[route])
    traj = discretize_arrays(route, ROOM)
    for r in results:
        report = run_route(replace(scenario, p_dth=r.p_dth), traj, r.predictor)
        assert r.rebeamform_pct_mean == pytest.approx(report.rebeamform_pct, abs=1e-12)
        assert r.mean_rx_power_mean == pytest.approx(report.mean_rx_power, abs=1e-12)
        assert r.rebeamform_pct_std == 0.0


def test_sweep_is_deterministic_and_ordered(scenario):
    kw = dict(n_waypoints=8, repetitions=4, p_dth_values=[1, 4, 9], seed=11)
    a = run_rwpm_sweep(scenario, **kw)
    assert a == run_rwpm_sweep(scenario, **kw)
    assert [(r.p_dth, r.predictor) for r in a] == [(p, k) for p in (1.0, 4.0, 9.0) for k in KINDS]
    text = sweep_to_csv(a)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 1 + len(a)
    assert text == sweep_to_csv(run_rwpm_sweep(scenario, **kw))
    assert a != run_rwpm_sweep(scenario, **{**kw, "seed": 12})


def test_sweep_rejects_empty_inputs(scenario):
    with pytest.raises(ValueError):
        run_rwpm_sweep(scenario, repetitions=0)
    with pytest.raises(ValueError):
        run_rwpm_sweep(scenario, p_dth_values=[])


def test_route_seeds_are_stable():
    assert route_seeds(0, 5) == route_seeds(0, 5)
    assert route_seeds(0, 5)[:3] == route_seeds(0, 3)
    assert len(set(route_seeds(0, 100))) == 100


# -- error identification ---------------------------------------------------

@pytest.fixture(scope="module")
def classifier():
    corpus = synthesize_corpus(duration=60.0, rate=100, seed=21)
    feats, labels = [], []
    for activity, arr in corpus.items():
        for f in feature_matrix(window(arr, 0.5)):
            feats.append(f)
            labels.append(activity)
    return train(feats, labels, k=3)


def test_still_drop_is_blockage(classifier):
    arr = synthesize_array(ActivityProfile(ActivityClass.STILL), 2.0, 100, 0)
    out = classify_and_identify(True, arr, classifier, 0.5)
    assert len(out) == 4
    assert all(a is ActivityClass.STILL and c is ErrorCause.BLOCKAGE for _, a, c in out)


def test_straight_drop_is_translation(classifier):
    arr = synthesize_array(DEFAULT_PROFILES[ActivityClass.STRAIGHT], 10.0, 100, 99)
    out = classify_and_identify(np.ones(len(arr), bool), arr, classifier, 0.5)
    hits = sum(c is ErrorCause.TRANSLATION for _, _, c in out)
    assert hits >= 0.9 * len(out)


def test_no_drop_means_no_cause(classifier):
    arr = synthesize_array(DEFAULT_PROFILES[ActivityClass.TURNING], 2.0, 100, 4)
    out = classify_and_identify(False, arr, classifier, 0.5)
    assert out and all(c is ErrorCause.NONE for _, _, c in out)


def test_flags_must_align(classifier):
    arr = synthesize_array(ActivityProfile(ActivityClass.STILL), 1.0, 100, 0)
    with pytest.raises(ValueError):
        classify_and_identify(np.zeros(3, bool), arr, classifier, 0.5)


def test_power_drop_flags(scenario):
    traj = walk((0.5, 5.0), (9.5, 5.0))
    report = run_route(scenario, traj, PredictorKind.NONE)
    sample_t = np.arange(0, traj.times[-1], 0.01)
    flags = power_drop_flags(report, traj.times, sample_t)
    assert flags.shape == sample_t.shape
    event_steps = {e.step_index for e in report.events}
    step_of = np.searchsorted(traj.times, sample_t, side="right") - 1
    assert np.array_equal(flags, np.isin(step_of, list(event_steps)))
    assert flags.any() and not flags.all()
