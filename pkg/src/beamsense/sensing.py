"""Inertial-sensor windowing, feature extraction and kNN activity recognition.

A trace is a time-ordered sequence of fused rows ``t, ax, ay, az, gx, gy,
gz, azimuth, pitch, roll``. Functions accept either a list of
:class:`SensorSample` or an ``(N, 10)`` array in that column order.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, FormatError, StateError

TRACE_COLUMNS = ("t", "ax", "ay", "az", "gx", "gy", "gz", "azimuth", "pitch", "roll")
N_FEATURES = 15
_EPS_T = 1e-9


class ActivityClass(Enum):
    STILL = "still"
    STRAIGHT = "straight"
    TURNING = "turning"
    TURNING_AND_MOVING = "turning_and_moving"

    @classmethod
    def parse(cls, name: str) -> "ActivityClass":
        key = name.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"turningandmoving": "turning_and_moving", "both": "turning_and_moving"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown activity {name!r}") from None


class ErrorCause(Enum):
    TRANSLATION = "translation"
    ROTATION = "rotation"
    BOTH = "both"
    BLOCKAGE = "blockage"
    NONE = "none"


_ORDER = {c: i for i, c in enumerate(ActivityClass)}


@dataclass(frozen=True)
class SensorSample:
    """One fused inertial reading. Angles in radians, SI units throughout."""

    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]
    orientation: tuple[float, float, float]

    @property
    def azimuth(self) -> float:
        return self.orientation[0]

    def as_row(self) -> tuple[float, ...]:
        return (self.t, *self.accel, *self.gyro, *self.orientation)

    @classmethod
    def from_row(cls, row) -> "SensorSample":
        r = [float(v) for v in row]
        return cls(r[0], (r[1], r[2], r[3]), (r[4], r[5], r[6]), (r[7], r[8], r[9]))


class FeatureVector(NamedTuple):
    """Per-window statistics: accel/gyro means, accel/gyro std, max accel autocorrelation."""

    values: np.ndarray

    @property
    def mean_accel(self):
        return self.values[0:3]

    @property
    def mean_gyro(self):
        return self.values[3:6]

    @property
    def std_accel(self):
        return self.values[6:9]

    @property
    def std_gyro(self):
        return self.values[9:12]

    @property
    def max_autocorr(self):
        return self.values[12:15]


def as_array(trace) -> np.ndarray:
    """Coerce a trace (samples or array) to a float ``(N, 10)`` array."""
    if isinstance(trace, np.ndarray):
        arr = np.asarray(trace, dtype=float)
    else:
        rows = [s.as_row() if isinstance(s, SensorSample) else tuple(s) for s in trace]
        arr = np.asarray(rows, dtype=float) if rows else np.empty((0, len(TRACE_COLUMNS)))
    if arr.ndim != 2 or arr.shape[1] != len(TRACE_COLUMNS):
        raise FormatError(f"trace must have {len(TRACE_COLUMNS)} columns, got shape {arr.shape}")
    return arr


def to_samples(arr: np.ndarray) -> list[SensorSample]:
    return [SensorSample.from_row(r) for r in np.asarray(arr)]


def _check_time(t: np.ndarray) -> None:
    if not np.all(np.isfinite(t)):
        raise FormatError("timestamps must be finite")
    if t.size > 1:
        bad = np.flatnonzero(np.diff(t) < 0)
        if bad.size:
            raise FormatError(f"timestamps decrease at sample {int(bad[0]) + 1}")


def window_bounds(t, window_len: float, stride: float) -> list[tuple[int, int]]:
    """Half-open index ranges of the sliding windows over timestamps ``t``.

    Windows start at ``t[0] + m * stride`` and cover ``[t0, t0 + window_len)``;
    windows with fewer than two samples are dropped.
    """
    if not window_len > 0 or not stride > 0:
        raise DomainError("window_len and stride must be positive")
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        return []
    _check_time(t)
    bounds = []
    start_t, last_t = t[0], t[-1]
    m = 0
    while True:
        t0 = start_t + m * stride
        if t0 > last_t + _EPS_T:
            break
        lo = int(np.searchsorted(t, t0 - _EPS_T, side="left"))
        hi = int(np.searchsorted(t, t0 + window_len - _EPS_T, side="left"))
        if hi - lo >= 2:
            bounds.append((lo, hi))
        m += 1
    return bounds


def window(trace, window_len: float, stride: float | None = None) -> list[np.ndarray]:
    """Split a trace into fixed-duration windows, each an ``(W, 10)`` array.

    ``stride`` defaults to ``window_len`` (non-overlapping windows).
    """
    arr = as_array(trace)
    stride = window_len if stride is None else stride
    return [arr[lo:hi] for lo, hi in window_bounds(arr[:, 0], window_len, stride)]


def max_autocorrelation(x) -> float:
    """Largest normalized autocorrelation over lags ``1 .. W-1``.

    A constant signal has no defined correlation and yields 0.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise DomainError("autocorrelation needs at least 2 samples")
    if np.ptp(x) == 0:
        return 0.0
    dev = x - x.mean()
    denom = float(dev @ dev)
    if denom == 0:
        return 0.0
    full = np.correlate(dev, dev, mode="full")
    lags = full[x.size:]  # lags 1 .. W-1
    return float(np.clip(lags.max() / denom, -1.0, 1.0))


def _std(x: np.ndarray) -> float:
    return 0.0 if np.ptp(x) == 0 else float(np.std(x))


def extract_features(win) -> FeatureVector:
    arr = as_array(win)
    if len(arr) < 2:
        raise DomainError(f"feature extraction needs >= 2 samples, got {len(arr)}")
    accel, gyro = arr[:, 1:4], arr[:, 4:7]
    values = np.concatenate([
        accel.mean(axis=0),
        gyro.mean(axis=0),
        [_std(accel[:, i]) for i in range(3)],
        [_std(gyro[:, i]) for i in range(3)],
        [max_autocorrelation(accel[:, i]) for i in range(3)],
    ])
    # constant columns give an exact mean, not an accumulated one
    for col, src in ((0, accel), (3, gyro)):
        for i in range(3):
            if np.ptp(src[:, i]) == 0:
                values[col + i] = src[0, i]
    return FeatureVector(values)


def feature_matrix(windows: Sequence) -> np.ndarray:
    if not windows:
        return np.empty((0, N_FEATURES))
    return np.vstack([extract_features(w).values for w in windows])


# -- kNN ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainedClassifier:
    """Labelled training features with the z-score statistics used at query time."""

    features: np.ndarray
    labels: tuple[ActivityClass, ...]
    k: int = 3
    mean: np.ndarray | None = None
    std: np.ndarray | None = None
    normalize: bool = True

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float).reshape(-1, N_FEATURES)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(feats):
            raise ValueError("features and labels differ in length")
        if len(feats) == 0:
            return
        if not 1 <= self.k <= len(feats):
            raise ValueError(f"k must lie in [1, {len(feats)}], got {self.k}")
        if self.mean is None or self.std is None:
            mean = feats.mean(axis=0)
            std = feats.std(axis=0)
            std = np.where(std > 0, std, 1.0)
            object.__setattr__(self, "mean", mean)
            object.__setattr__(self, "std", std)

    @property
    def training(self) -> list[tuple[FeatureVector, ActivityClass]]:
        return [(FeatureVector(f), c) for f, c in zip(self.features, self.labels)]

    def _scale(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std if self.normalize else x

    def distances(self, f) -> np.ndarray:
        """Euclidean distances from ``f`` to every training vector."""
        if len(self.labels) == 0:
            raise StateError("classifier has no training data")
        x = np.asarray(getattr(f, "values", f), dtype=float)
        if x.shape != (N_FEATURES,):
            raise DomainError(f"feature vector must have {N_FEATURES} elements, got {x.shape}")
        return cdist(self._scale(self.features), self._scale(x)[None, :])[:, 0]


def train(features, labels, k: int = 3, normalize: bool = True) -> TrainedClassifier:
    """Build a kNN classifier from feature rows (or FeatureVectors) and labels."""
    rows = [getattr(f, "values", f) for f in features]
    matrix = np.vstack(rows) if rows else np.empty((0, N_FEATURES))
    return TrainedClassifier(matrix, tuple(labels), k=k, normalize=normalize)


def _nearest_k(dist: np.ndarray, k: int) -> np.ndarray:
    # same result as a stable full sort truncated to k, without sorting everything
    if k < len(dist):
        kth = np.partition(dist, k - 1)[k - 1]
        candidates = np.flatnonzero(dist <= kth)
    else:
        candidates = np.arange(len(dist))
    return candidates[np.argsort(dist[candidates], kind="stable")][:k]


def _vote(labels, dist, nearest) -> ActivityClass:
    votes = Counter()
    summed = Counter()
    for i in nearest:
        c = labels[i]
        votes[c] += 1
        summed[c] += float(dist[i])
    return min(votes, key=lambda c: (-votes[c], summed[c], _ORDER[c]))


def knn_classify(classifier: TrainedClassifier, f) -> ActivityClass:
    """Majority vote among the ``k`` nearest training vectors.

    Ties between equally voted classes go to the smaller summed neighbour
    distance, then to enumeration order.
    """
    dist = classifier.distances(f)
    return _vote(classifier.labels, dist, _nearest_k(dist, classifier.k))


def classify_features(classifier: TrainedClassifier, features, chunk: int = 256) -> list[ActivityClass]:
    """Vectorized :func:`knn_classify` over the rows of ``features``."""
    if len(classifier.labels) == 0:
        raise StateError("classifier has no training data")
    X = np.asarray(features, dtype=float).reshape(-1, N_FEATURES)
    train_scaled = classifier._scale(classifier.features)
    out = []
    for start in range(0, len(X), chunk):
        block = cdist(classifier._scale(X[start:start + chunk]), train_scaled)
        for dist in block:
            out.append(_vote(classifier.labels, dist, _nearest_k(dist, classifier.k)))
    return out


def classify_windows(classifier: TrainedClassifier, windows) -> list[ActivityClass]:
    return classify_features(classifier, feature_matrix(windows))


_CAUSE = {
    ActivityClass.STILL: ErrorCause.BLOCKAGE,
    ActivityClass.STRAIGHT: ErrorCause.TRANSLATION,
    ActivityClass.TURNING: ErrorCause.ROTATION,
    ActivityClass.TURNING_AND_MOVING: ErrorCause.BOTH,
}


def identify_error(activity: ActivityClass, power_dropped: bool) -> ErrorCause:
    """Map the sensed activity at a power drop to its likely cause.

    A drop with no sensed motion is attributed to blockage.
    """
    if not power_dropped:
        return ErrorCause.NONE
    return _CAUSE[activity]


# -- ingestion ----------------------------------------------------------------


def fuse_streams(accel_t, accel, gyro_t, gyro, orient_t=None, orient=None) -> np.ndarray:
    """Resample gyro and orientation streams onto accelerometer timestamps.

    Each accelerometer row takes the nearest-in-time gyro (and orientation)
    row; with ``orient`` omitted the orientation columns are zero.
    """
    accel_t = np.asarray(accel_t, dtype=float)
    accel = np.asarray(accel, dtype=float).reshape(-1, 3)
    out = np.zeros((len(accel_t), len(TRACE_COLUMNS)))
    out[:, 0] = accel_t
    out[:, 1:4] = accel
    if len(accel_t) == 0:
        return out
    _check_time(accel_t)
    out[:, 4:7] = _nearest(accel_t, gyro_t, np.asarray(gyro, dtype=float).reshape(-1, 3))
    if orient is not None:
        out[:, 7:10] = _nearest(accel_t, orient_t, np.asarray(orient, dtype=float).reshape(-1, 3))
    return out


def _nearest(target_t, src_t, src):
    src_t = np.asarray(src_t, dtype=float)
    if len(src_t) == 0:
        raise FormatError("cannot resample an empty stream")
    _check_time(src_t)
    if len(src_t) == 1:
        return np.repeat(src[:1], len(target_t), axis=0)
    hi = np.clip(np.searchsorted(src_t, target_t), 1, len(src_t) - 1)
    lo = hi - 1
    pick = np.where(target_t - src_t[lo] <= src_t[hi] - target_t, lo, hi)
    return src[pick]


def read_trace_csv(path) -> np.ndarray:
    """Read a fused trace CSV into an ``(N, 10)`` array.

    Raises :class:`FormatError` carrying the 1-based line number of the
    first bad row.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise FormatError("empty file, expected a header", line=1, path=str(path))
        if tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise FormatError(f"header must be {','.join(TRACE_COLUMNS)}", line=1, path=str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(TRACE_COLUMNS):
                raise FormatError(f"expected {len(TRACE_COLUMNS)} fields, got {len(row)}", line=lineno, path=str(path))
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise FormatError("non-numeric field", line=lineno, path=str(path)) from None
            if not all(math.isfinite(v) for v in values):
                raise FormatError("non-finite field", line=lineno, path=str(path))
            if rows and values[0] < rows[-1][0]:
                raise FormatError("timestamps must be non-decreasing", line=lineno, path=str(path))
            rows.append(values)
    return np.asarray(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))


def write_trace_csv(path, trace) -> None:
    arr = as_array(trace)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in arr:
            writer.writerow([f"{row[0]:.6f}"] + [f"{v:.9g}" for v in row[1:]])


def read_manifest(path) -> list[tuple[ActivityClass, Path]]:
    """Read a ``label,path`` manifest; relative paths resolve against its directory."""
    path = Path(path)
    entries = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["label", "path"]:
            raise FormatError("manifest header must be 'label,path'", line=1, path=str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatError("expected 2 fields", line=lineno, path=str(path))
            try:
                label = ActivityClass.parse(row[0])
            except ValueError as exc:
                raise FormatError(str(exc), line=lineno, path=str(path)) from None
            entries.append((label, path.parent / row[1].strip()))
    return entries


def write_manifest(path, entries) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "path"])
        for label, trace_path in entries:
            writer.writerow([label.value, str(trace_path)])


def labelled_features(entries, window_len: float, stride: float | None = None):
    """Windowed features and labels for ``(label, trace)`` pairs.

    ``trace`` may be an array, a sample list or a CSV path.
    """
    feats, labels = [], []
    for label, trace in entries:
        if isinstance(trace, (str, Path)):
            trace = read_trace_csv(trace)
        wins = window(trace, window_len, stride)
        if wins:
            feats.append(feature_matrix(wins))
            labels.extend([label] * len(wins))
    matrix = np.vstack(feats) if feats else np.empty((0, N_FEATURES))
    return matrix, labels
