"""End-to-end beam tracking along a trajectory.

At every step the AP's current beam is evaluated at the user's position.
A fall below the absolute floor ``p_rth`` forces a full beam search; a
drop of ``p_dth`` dB below the power measured when the beam was last set
invokes the predictor. A prediction is accepted if it picks the correct
sector (the oracle best sector, or, with ``use_validation``, any sector
that passes the beam-pair test); otherwise the AP falls back to a beam
search. Re-beamforming counts are the overhead being compared.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .mobility import Route, Trajectory, discretize_arrays, random_waypoint
from .prediction import PredictionContext, PredictorKind, predict
from .propagation import Scenario, SectorId, best_sector_indices, power_matrix
from .sensing import (ActivityClass, ErrorCause, TrainedClassifier, as_array,
                      extract_features, identify_error, knn_classify, window_bounds)


class EventKind(Enum):
    BEAM_SWITCH = "BeamSwitch"
    REBEAMFORM = "ReBeamform"
    FORCED_REBEAMFORM = "ForcedReBeamform"


REBEAMFORM_KINDS = (EventKind.REBEAMFORM, EventKind.FORCED_REBEAMFORM)


@dataclass(frozen=True)
class SimEvent:
    step_index: int
    kind: EventKind
    from_sector: SectorId
    to_sector: SectorId
    rx_power_before: float
    rx_power_after: float
    predicted: SectorId | None = None

    def to_dict(self) -> dict:
        return {
            "step": self.step_index,
            "kind": self.kind.value,
            "from": [self.from_sector.x, self.from_sector.y],
            "to": [self.to_sector.x, self.to_sector.y],
            "predicted": None if self.predicted is None else [self.predicted.x, self.predicted.y],
            "rx_power_before_dbm": self.rx_power_before,
            "rx_power_after_dbm": self.rx_power_after,
        }


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """Per-step power and beam, the event list and aggregate counters."""

    predictor: PredictorKind
    use_validation: bool
    p_dth: float
    p_rth: float
    positions: np.ndarray
    sectors: np.ndarray  # (N, 2) 1-based sector x, y after event handling
    power_trace: np.ndarray
    events: tuple[SimEvent, ...]
    predictor_invocations: int

    @property
    def n_steps(self) -> int:
        return len(self.power_trace)

    @property
    def rebeamform_count(self) -> int:
        return sum(1 for e in self.events if e.kind in REBEAMFORM_KINDS)

    @property
    def beam_switch_count(self) -> int:
        return sum(1 for e in self.events if e.kind is EventKind.BEAM_SWITCH)

    @property
    def forced_count(self) -> int:
        return sum(1 for e in self.events if e.kind is EventKind.FORCED_REBEAMFORM)

    @property
    def rebeamform_pct(self) -> float:
        return 100.0 * self.rebeamform_count / self.n_steps

    @property
    def mean_rx_power(self) -> float:
        return float(np.mean(self.power_trace))

    def summary(self) -> dict:
        return {
            "predictor": self.predictor.value,
            "use_validation": self.use_validation,
            "p_dth_db": self.p_dth,
            "p_rth_dbm": self.p_rth,
            "steps": self.n_steps,
            "rebeamform_count": self.rebeamform_count,
            "forced_rebeamform_count": self.forced_count,
            "beam_switch_count": self.beam_switch_count,
            "predictor_invocations": self.predictor_invocations,
            "rebeamform_pct": self.rebeamform_pct,
            "mean_rx_power_dbm": self.mean_rx_power,
        }

    def to_json(self) -> str:
        doc = {
            "summary": self.summary(),
            "events": [e.to_dict() for e in self.events],
            "power_trace_dbm": [float(p) for p in self.power_trace],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        by_step = {}
        for e in self.events:
            by_step.setdefault(e.step_index, []).append(e.kind.value)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "x", "y", "sector_x", "sector_y", "rx_power_dbm", "event"])
        for i, ((x, y), (sx, sy), p) in enumerate(zip(self.positions, self.sectors, self.power_trace)):
            writer.writerow([i, f"{x:.4f}", f"{y:.4f}", int(sx), int(sy), f"{p:.4f}",
                             ";".join(by_step.get(i, []))])
        return buf.getvalue()


def _as_trajectory(trajectory) -> Trajectory:
    if isinstance(trajectory, Trajectory):
        return trajectory
    return Trajectory.from_steps(trajectory)


@dataclass(frozen=True, eq=False)
class PreparedRoute:
    """A trajectory with its power matrix and oracle beams, reusable across runs."""

    trajectory: Trajectory
    power: np.ndarray
    rows: list = field(repr=False)
    best: list = field(repr=False)
    headings: list = field(repr=False)

    @classmethod
    def build(cls, scenario: Scenario, trajectory: Trajectory, power=None) -> "PreparedRoute":
        if len(trajectory) == 0:
            raise ValueError("trajectory is empty")
        if power is None:
            power = power_matrix(scenario, trajectory.positions)
        return cls(trajectory, power, power.tolist(), best_sector_indices(power).tolist(),
                   np.asarray(trajectory.headings, dtype=float).tolist())


def simulate(scenario: Scenario, route: PreparedRoute, kind: PredictorKind,
             use_validation: bool = False) -> SimulationReport:
    """Array-level core of :func:`run_route` on a prepared trajectory."""
    rows, best_l, headings = route.rows, route.best, route.headings
    n = scenario.sector_grid_n
    p_dth, p_rth = scenario.p_dth, scenario.p_rth
    sector_list = list(scenario.sectors())
    sector_at = sector_list.__getitem__

    beam = best_l[0]
    previous = None  # sector index held before the last beam change
    reference = rows[0][beam]
    trace = [0.0] * len(rows)
    beams = [0] * len(rows)
    events = []
    invocations = 0

    for i, row in enumerate(rows):
        p = row[beam]
        new_beam = None
        if p <= p_rth:
            new_beam = best_l[i]
            events.append(SimEvent(i, EventKind.FORCED_REBEAMFORM, sector_at(beam),
                                   sector_at(new_beam), p, row[new_beam]))
        elif p <= reference - p_dth:
            invocations += 1
            ctx = PredictionContext(
                current=sector_at(beam),
                previous=None if previous is None else sector_at(previous),
                azimuth=headings[i],
            )
            guess = predict(kind, ctx, n)
            if guess is None:
                new_beam = best_l[i]
                events.append(SimEvent(i, EventKind.REBEAMFORM, ctx.current, sector_at(new_beam), p, row[new_beam]))
            else:
                g = (guess.y - 1) * n + (guess.x - 1)
                accepted = row[g] > p if use_validation else g == best_l[i]
                if accepted:
                    new_beam = g
                    events.append(SimEvent(i, EventKind.BEAM_SWITCH, ctx.current, guess, p, row[g], guess))
                else:
                    new_beam = best_l[i]
                    events.append(SimEvent(i, EventKind.REBEAMFORM, ctx.current, sector_at(new_beam),
                                           p, row[new_beam], guess))
        if new_beam is not None:
            if new_beam != beam:
                previous = beam
            beam = new_beam
            reference = row[beam]
            p = reference
        trace[i] = p
        beams[i] = beam

    beams_arr = np.asarray(beams)
    sectors = np.column_stack([beams_arr % n + 1, beams_arr // n + 1])
    return SimulationReport(
        predictor=kind,
        use_validation=use_validation,
        p_dth=p_dth,
        p_rth=p_rth,
        positions=np.asarray(route.trajectory.positions, dtype=float),
        sectors=sectors,
        power_trace=np.asarray(trace),
        events=tuple(events),
        predictor_invocations=invocations,
    )


def run_route(scenario: Scenario, trajectory, kind: PredictorKind,
              use_validation: bool = False) -> SimulationReport:
    """Track the AP beam along ``trajectory`` with the given predictor.

    Parameters
    ----------
    trajectory : Trajectory or sequence of TrajectoryStep
        Positions must lie inside the room; a position outside raises
        :class:`~beamsense.errors.DomainError` naming the step index.
    use_validation : bool
        Accept a predicted sector when it beats the current power instead
        of requiring it to equal the best sector.
    """
    prepared = PreparedRoute.build(scenario, _as_trajectory(trajectory))
    return simulate(scenario, prepared, kind, use_validation)


@dataclass(frozen=True)
class SweepResult:
    p_dth: float
    predictor: PredictorKind
    repetitions: int
    rebeamform_pct_mean: float
    rebeamform_pct_std: float
    mean_rx_power_mean: float
    mean_rx_power_std: float
    rebeamform_pct: tuple[float, ...] = field(default=(), repr=False)
    mean_rx_power: tuple[float, ...] = field(default=(), repr=False)


SWEEP_COLUMNS = ("p_dth", "predictor", "rebeamform_pct_mean", "rebeamform_pct_std", "mean_rx_power_dbm")


def route_seeds(seed: int, repetitions: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(repetitions, dtype=np.uint32)]


def run_rwpm_sweep(scenario: Scenario, n_waypoints: int = 100, repetitions: int = 100,
                   p_dth_values: Sequence[float] = tuple(range(1, 11)),
                   kinds: Iterable[PredictorKind] = tuple(PredictorKind), seed: int = 0,
                   use_validation: bool = False, routes: Sequence[Route] | None = None) -> list[SweepResult]:
    """Re-beamforming statistics over seeded random waypoint routes.

    Every (threshold, predictor) pair is evaluated on the same route set so
    comparisons are paired. Passing ``routes`` replaces the random routes.
    Results are ordered by threshold, then predictor.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    p_dth_values = [abs(float(v)) for v in p_dth_values]
    if not p_dth_values:
        raise ValueError("p_dth_values is empty")
    kinds = list(kinds)
    room = scenario.room_dims[:2]
    if routes is None:
        routes = [random_waypoint(room, n_waypoints, s) for s in route_seeds(seed, repetitions)]
    prepared = [PreparedRoute.build(scenario, discretize_arrays(r, room)) for r in routes]

    results = []
    for p_dth in p_dth_values:
        sc = replace(scenario, p_dth=p_dth)
        for kind in kinds:
            reports = [simulate(sc, pr, kind, use_validation) for pr in prepared]
            pct = np.array([r.rebeamform_pct for r in reports])
            mean_p = np.array([r.mean_rx_power for r in reports])
            results.append(SweepResult(
                p_dth=p_dth, predictor=kind, repetitions=len(reports),
                rebeamform_pct_mean=float(pct.mean()), rebeamform_pct_std=float(pct.std()),
                mean_rx_power_mean=float(mean_p.mean()), mean_rx_power_std=float(mean_p.std()),
                rebeamform_pct=tuple(pct.tolist()), mean_rx_power=tuple(mean_p.tolist()),
            ))
    return results


def sweep_to_csv(results: Sequence[SweepResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in results:
        writer.writerow([f"{r.p_dth:g}", r.predictor.value, f"{r.rebeamform_pct_mean:.6f}",
                         f"{r.rebeamform_pct_std:.6f}", f"{r.mean_rx_power_mean:.6f}"])
    return buf.getvalue()


# -- error identification over a live trace ---------------------------------


def power_drop_flags(report: SimulationReport, step_times, sample_times) -> np.ndarray:
    """Per-sample flags marking samples that fall in a step with a power event.

    Sample ``t`` belongs to the last step with ``step_time <= t``.
    """
    step_times = np.asarray(step_times, dtype=float)
    sample_times = np.asarray(sample_times, dtype=float)
    dropped = np.zeros(len(step_times), dtype=bool)
    for e in report.events:
        dropped[e.step_index] = True
    idx = np.clip(np.searchsorted(step_times, sample_times, side="right") - 1, 0, len(step_times) - 1)
    return dropped[idx]


def classify_and_identify(power_flags, trace, classifier: TrainedClassifier, window_len: float,
                          stride: float | None = None) -> list[tuple[np.ndarray, ActivityClass, ErrorCause]]:
    """Classify each window of ``trace`` and attribute any power drop within it.

    ``power_flags`` is one boolean per trace sample (or a single boolean
    applied to all); a window counts as dropped if any of its samples is.
    """
    arr = as_array(trace)
    flags = np.asarray(power_flags, dtype=bool)
    if flags.ndim == 0:
        flags = np.full(len(arr), bool(flags))
    if len(flags) != len(arr):
        raise ValueError("power_flags must align with the trace samples")
    out = []
    for lo, hi in window_bounds(arr[:, 0], window_len, window_len if stride is None else stride):
        win = arr[lo:hi]
        activity = knn_classify(classifier, extract_features(win))
        out.append((win, activity, identify_error(activity, bool(flags[lo:hi].any()))))
    return out
