"""Shared domain types, timestamp arithmetic, and the metric-record vocabulary.

Timestamps are plain float seconds relative to the sequence epoch (the first
timestamp of the earliest stream). Derivatives use forward differences with
the exact per-interval dt; derivative samples are attributed to interval
midpoints so second derivatives stay well-defined on irregular grids.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class SensorKind(enum.Enum):
    CAM_LEFT = "cam_left"
    CAM_RIGHT = "cam_right"
    IMU = "imu"


class CharacterizationLevel(enum.Enum):
    SAMPLE = "sample"
    SEQUENCE = "sequence"
    DATASET = "dataset"


class Applicability(enum.Enum):
    PRESENT = "present"
    ABSENT = "absent"


@dataclass(frozen=True)
class SensorLimits:
    """Inertial rail limits; dynamic range per axis is 2 * limit."""

    accel_limit: float  # +/- m/s^2
    gyro_limit: float  # +/- deg/s

    def __post_init__(self):
        if not (self.accel_limit > 0 and self.gyro_limit > 0):
            raise ValueError("sensor limits must be strictly positive")


@dataclass
class ImuSeries:
    """Timestamped accelerometer + gyroscope series in the body frame.

    accel is m/s^2, gyro is deg/s (the canonical unit of every engine; the
    ASL adaptor converts rad/s at ingestion). Shapes: t (N,), accel (N, 3),
    gyro (N, 3).
    """

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.accel = np.asarray(self.accel, dtype=np.float64)
        self.gyro = np.asarray(self.gyro, dtype=np.float64)
        n = self.t.shape[0]
        if self.accel.shape != (n, 3) or self.gyro.shape != (n, 3):
            raise ValueError("accel/gyro must be (N, 3) matching timestamps")
        if not (np.isfinite(self.accel).all() and np.isfinite(self.gyro).all()):
            raise ValueError("IMU channels must be finite")

    def __len__(self):
        return self.t.shape[0]


@dataclass
class Frame:
    """One decoded camera frame: 8-bit raster, (H, W) gray or (H, W, 3) RGB."""

    t: float
    index: int
    image: np.ndarray

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def width(self) -> int:
        return self.image.shape[1]


@dataclass
class MetricRecord:
    """A metric value series keyed by sample index, or a single aggregate.

    values are (key, value) pairs; sample-level records key by frame/sample
    index, sequence-level records carry a single ("value", x) entry. ABSENT
    records carry no values and are excluded from every aggregation.
    """

    metric_id: str
    level: CharacterizationLevel
    unit: str
    values: list[tuple[str, float]] = field(default_factory=list)
    applicability: Applicability = Applicability.PRESENT

    @classmethod
    def absent(cls, metric_id: str, level: CharacterizationLevel, unit: str) -> "MetricRecord":
        return cls(metric_id, level, unit, [], Applicability.ABSENT)

    @classmethod
    def sequence_value(cls, metric_id: str, unit: str, value: float) -> "MetricRecord":
        return cls(metric_id, CharacterizationLevel.SEQUENCE, unit, [("value", float(value))])

    @classmethod
    def sample_series(cls, metric_id: str, unit: str, values, keys=None) -> "MetricRecord":
        values = np.asarray(values, dtype=np.float64)
        if keys is None:
            keys = range(len(values))
        pairs = [(str(k), float(v)) for k, v in zip(keys, values)]
        return cls(metric_id, CharacterizationLevel.SAMPLE, unit, pairs)

    def value_array(self) -> np.ndarray:
        return np.array([v for _, v in self.values], dtype=np.float64)


# distances this close (relative to the timestamp magnitude) count as a
# tie; decimal-equidistant queries land a few ulps off the binary midpoint
_TIE_RTOL = 16 * np.finfo(np.float64).eps


def _tie_tolerance(query) -> float:
    return _TIE_RTOL * np.maximum(1.0, np.abs(query))


def nearest_timestamp(query: float, stream: np.ndarray) -> tuple[int, float]:
    """Index of the stream timestamp closest to query, and the signed offset.

    Offset is t_stream - query. Equidistant ties resolve to the earlier index.
    """
    stream = np.asarray(stream, dtype=np.float64)
    if stream.size == 0:
        raise ValueError("empty stream")
    pos = int(np.searchsorted(stream, query))
    if pos == 0:
        idx = 0
    elif pos == stream.size:
        idx = stream.size - 1
    else:
        before, after = stream[pos - 1], stream[pos]
        dist_before = query - before
        dist_after = after - query
        idx = pos if dist_before - dist_after > _tie_tolerance(query) else pos - 1
    return idx, float(stream[idx] - query)


def nearest_timestamps(queries: np.ndarray, stream: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized nearest_timestamp over a query array."""
    queries = np.asarray(queries, dtype=np.float64)
    stream = np.asarray(stream, dtype=np.float64)
    if stream.size == 0:
        raise ValueError("empty stream")
    pos = np.searchsorted(stream, queries)
    pos = np.clip(pos, 1, stream.size - 1) if stream.size > 1 else np.zeros_like(pos)
    if stream.size == 1:
        idx = np.zeros(queries.shape, dtype=int)
    else:
        before = stream[pos - 1]
        after = stream[pos]
        take_after = (queries - before) - (after - queries) > _tie_tolerance(queries)
        idx = np.where(take_after, pos, pos - 1)
        # queries left of the first sample clamp to index 0
        idx = np.where(queries <= stream[0], 0, idx)
    return idx, stream[idx] - queries


def finite_difference(values: np.ndarray, timestamps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward difference (v[i+1]-v[i]) / (t[i+1]-t[i]) at exact timestamps.

    Returns the N-1 derivative samples and their midpoint timestamps
    (t[i] + t[i+1]) / 2. values may be (N,) or (N, D); differentiation runs
    along axis 0.
    """
    values = np.asarray(values, dtype=np.float64)
    timestamps = np.asarray(timestamps, dtype=np.float64)
    if timestamps.ndim != 1 or values.shape[0] != timestamps.shape[0]:
        raise ValueError("values and timestamps must share their leading length")
    if timestamps.shape[0] < 2:
        raise ValueError("too short")
    dt = np.diff(timestamps)
    if np.any(dt <= 0):
        raise ValueError("zero dt")
    dv = np.diff(values, axis=0)
    if values.ndim > 1:
        dt = dt.reshape((-1,) + (1,) * (values.ndim - 1))
    mid = (timestamps[:-1] + timestamps[1:]) / 2.0
    return dv / dt, mid
