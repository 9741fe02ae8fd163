"""User trajectories and synthetic inertial traces.

Routes are polylines walked at constant speed in fixed-length steps; the
device is assumed to face the direction of travel, so its azimuth equals
the segment heading. :func:`synthesize_trace` produces labelled sensor
traces for training and exercising the activity classifier.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError
from .prediction import wrap_angle
from .sensing import ActivityClass, SensorSample, TRACE_COLUMNS, to_samples

GRAVITY = 9.81


@dataclass(frozen=True)
class Route:
    waypoints: tuple[tuple[float, float], ...]
    speed: float = 1.0
    step_len: float = 0.1

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.waypoints)
        object.__setattr__(self, "waypoints", pts)
        if len(pts) < 2:
            raise DomainError("a route needs at least 2 waypoints")
        if not all(math.isfinite(v) for p in pts for v in p):
            raise DomainError("waypoints must be finite")
        if not self.speed > 0 or not self.step_len > 0:
            raise DomainError("speed and step_len must be positive")

    @property
    def length(self) -> float:
        pts = np.asarray(self.waypoints)
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


@dataclass(frozen=True)
class TrajectoryStep:
    position: tuple[float, float]
    heading: float
    t: float


@dataclass(frozen=True)
class Trajectory:
    """Array form of a discretized route: positions (N, 2), headings (N,), times (N,)."""

    positions: np.ndarray
    headings: np.ndarray
    times: np.ndarray

    def __len__(self):
        return len(self.positions)

    def steps(self) -> list[TrajectoryStep]:
        return [
            TrajectoryStep((float(p[0]), float(p[1])), float(h), float(t))
            for p, h, t in zip(self.positions, self.headings, self.times)
        ]

    @classmethod
    def from_steps(cls, steps) -> "Trajectory":
        steps = list(steps)
        return cls(
            np.array([s.position for s in steps], dtype=float).reshape(-1, 2),
            np.array([s.heading for s in steps], dtype=float),
            np.array([s.t for s in steps], dtype=float),
        )


def _heading(dx: float, dy: float) -> float:
    # compass bearing: 0 = +y, pi/2 = +x
    return wrap_angle(math.atan2(dx, dy))


def _check_room(points, room):
    if room is None:
        return
    w, d = room
    for i, (x, y) in enumerate(points):
        if not (0 <= x <= w and 0 <= y <= d):
            raise DomainError(f"waypoint {i} ({x}, {y}) outside the {w}x{d} m room")


def discretize_arrays(route: Route, room=None) -> Trajectory:
    """Walk ``route`` in ``step_len`` increments, segment by segment.

    Each segment contributes points at ``step_len, 2*step_len, ...`` and its
    end waypoint (the last step of a segment may be shorter). The start
    waypoint is step 0. Zero-length segments are skipped.
    """
    _check_room(route.waypoints, room)
    pts = np.asarray(route.waypoints, dtype=float)
    positions = [pts[0]]
    dists = [0.0]
    headings = []
    travelled = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        seg = b - a
        length = float(np.hypot(*seg))
        if length == 0.0:
            continue
        heading = _heading(seg[0], seg[1])
        if not headings:
            headings.append(heading)  # start point faces the first segment
        n = max(1, math.ceil(length / route.step_len - 1e-9))
        s = np.minimum(np.arange(1, n + 1) * route.step_len, length)
        s[-1] = length
        positions.extend(a + np.outer(s / length, seg))
        dists.extend(travelled + s)
        headings.extend([heading] * n)
        travelled += length
    if not headings:
        headings.append(0.0)
    pos = np.vstack(positions)
    if room is not None:
        # endpoints are exact; interior points may stray by rounding only
        pos[:, 0] = np.clip(pos[:, 0], 0.0, room[0])
        pos[:, 1] = np.clip(pos[:, 1], 0.0, room[1])
    return Trajectory(pos, np.asarray(headings), np.asarray(dists) / route.speed)


def discretize(route: Route, room=None) -> list[TrajectoryStep]:
    """Route to a list of :class:`TrajectoryStep`; see :func:`discretize_arrays`."""
    return discretize_arrays(route, room).steps()


def random_waypoint(room, n_waypoints: int, rng_seed: int, *, speed: float = 1.0,
                    step_len: float = 0.1, inset: float = 0.1) -> Route:
    """Random waypoint route: ``n_waypoints`` uniform points, no pauses."""
    if n_waypoints < 2:
        raise DomainError("random waypoint model needs at least 2 waypoints")
    w, d = float(room[0]), float(room[1])
    if not (w > 2 * inset and d > 2 * inset):
        raise DomainError("room too small for the waypoint inset")
    rng = np.random.default_rng(rng_seed)
    pts = rng.uniform((inset, inset), (w - inset, d - inset), size=(n_waypoints, 2))
    return Route(tuple(map(tuple, pts)), speed=speed, step_len=step_len)


def read_route_csv(path, speed: float = 1.0, step_len: float = 0.1) -> Route:
    """Load ``x,y`` rows; an optional ``x,y`` header line is skipped."""
    path = Path(path)
    pts = []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if lineno == 1 and [c.strip().lower() for c in row] == ["x", "y"]:
                continue
            if len(row) != 2:
                raise FormatError("expected 2 fields 'x,y'", line=lineno, path=str(path))
            try:
                pts.append((float(row[0]), float(row[1])))
            except ValueError:
                raise FormatError("non-numeric coordinate", line=lineno, path=str(path)) from None
    try:
        return Route(tuple(pts), speed=speed, step_len=step_len)
    except DomainError as exc:
        raise FormatError(str(exc), path=str(path)) from None


def write_route_csv(path, route: Route) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y"])
        writer.writerows((repr(x), repr(y)) for x, y in route.waypoints)


def bundled_route_path():
    return resources.files("beamsense") / "data" / "l_route.csv"


def l_route(speed: float = 1.0, step_len: float = 0.1) -> Route:
    """The bundled L-shaped demo route (up the west column, then east along the north row)."""
    with resources.as_file(bundled_route_path()) as p:
        return read_route_csv(p, speed=speed, step_len=step_len)


# -- synthetic sensor traces -------------------------------------------------


@dataclass(frozen=True)
class ActivityProfile:
    """Parameters of the synthetic IMU generator for one activity.

    Walking adds a vertical bob at ``step_freq`` with amplitude
    ``step_amp`` plus weaker fore-aft and lateral components; turning adds
    a constant yaw rate ``turn_rate`` on the gyro z axis that is integrated
    into the azimuth.
    """

    activity: ActivityClass
    accel_noise_std: float = 0.0
    step_freq: float = 0.0
    step_amp: float = 0.0
    turn_rate: float = 0.0
    gyro_noise_std: float = 0.0
    freq_jitter: float = field(default=0.0)

    def __post_init__(self):
        for name in ("accel_noise_std", "step_amp", "gyro_noise_std", "freq_jitter", "step_freq"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.turn_rate < 0:
            raise DomainError("turn_rate must be >= 0")
        if self.step_amp > 0 and not self.step_freq > 0:
            raise DomainError("step_freq must be positive when step_amp > 0")


DEFAULT_PROFILES = {
    ActivityClass.STILL: ActivityProfile(ActivityClass.STILL, accel_noise_std=0.04, gyro_noise_std=0.01),
    ActivityClass.STRAIGHT: ActivityProfile(
        ActivityClass.STRAIGHT, accel_noise_std=0.35, step_freq=1.8, step_amp=1.6,
        gyro_noise_std=0.12, freq_jitter=0.15),
    ActivityClass.TURNING: ActivityProfile(
        ActivityClass.TURNING, accel_noise_std=0.12, turn_rate=0.9, gyro_noise_std=0.15),
    ActivityClass.TURNING_AND_MOVING: ActivityProfile(
        ActivityClass.TURNING_AND_MOVING, accel_noise_std=0.35, step_freq=1.8, step_amp=1.6,
        turn_rate=0.5, gyro_noise_std=0.15, freq_jitter=0.15),
}


def synthesize_array(profile: ActivityProfile, duration: float, rate: float, rng_seed: int,
                     initial_azimuth: float = 0.0) -> np.ndarray:
    """Synthetic fused trace as an ``(N, 10)`` array, N = round(duration * rate).

    Azimuth at sample ``i`` is the heading after integrating the yaw rate
    over samples ``0..i``.
    """
    if not duration > 0 or not rate > 0:
        raise DomainError("duration and rate must be positive")
    n = int(round(duration * rate))
    dt = 1.0 / rate
    rng = np.random.default_rng(rng_seed)
    t = np.arange(n) * dt

    accel = np.zeros((n, 3))
    accel[:, 2] = GRAVITY
    gyro = np.zeros((n, 3))

    if profile.step_amp > 0:
        # slowly wandering cadence, one phase per trace
        freq = profile.step_freq * (1 + profile.freq_jitter * np.sin(2 * np.pi * t / 20 + rng.uniform(0, 2 * np.pi)))
        phase = 2 * np.pi * np.cumsum(freq) * dt + rng.uniform(0, 2 * np.pi)
        amp = profile.step_amp
        accel[:, 2] += amp * np.sin(phase)
        accel[:, 1] += 0.4 * amp * np.sin(phase + np.pi / 2)
        accel[:, 0] += 0.25 * amp * np.sin(phase / 2)
        gyro[:, 0] += 0.03 * amp * np.sin(phase / 2)  # hip sway
    if profile.turn_rate > 0:
        gyro[:, 2] += profile.turn_rate

    if profile.accel_noise_std > 0:
        accel += rng.normal(0.0, profile.accel_noise_std, size=accel.shape)
    if profile.gyro_noise_std > 0:
        gyro += rng.normal(0.0, profile.gyro_noise_std, size=gyro.shape)

    out = np.zeros((n, len(TRACE_COLUMNS)))
    out[:, 0] = t
    out[:, 1:4] = accel
    out[:, 4:7] = gyro
    azimuth = initial_azimuth + np.cumsum(gyro[:, 2]) * dt
    out[:, 7] = np.mod(azimuth, 2 * np.pi)
    return out


def synthesize_trace(profile: ActivityProfile, duration: float, rate: float, rng_seed: int,
                     initial_azimuth: float = 0.0) -> list[SensorSample]:
    return to_samples(synthesize_array(profile, duration, rate, rng_seed, initial_azimuth))


def synthesize_corpus(duration: float = 300.0, rate: float = 100.0, seed: int = 0, profiles=None):
    """One synthetic trace per activity, seeded independently per class."""
    profiles = DEFAULT_PROFILES if profiles is None else profiles
    seeds = np.random.SeedSequence(seed).generate_state(len(profiles))
    return {
        activity: synthesize_array(profile, duration, rate, int(s))
        for (activity, profile), s in zip(profiles.items(), seeds)
    }
