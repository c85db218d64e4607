"""Non-sensory characterization: counts, durations, sample times, V-I mismatch."""

from __future__ import annotations

import numpy as np

from .core import nearest_timestamps


def total_duration(timestamps: np.ndarray) -> float | None:
    """Total span of a stream, the telescoping sum of inter-sample gaps."""
    t = np.asarray(timestamps, dtype=np.float64)
    if t.size < 2:
        return None
    return float(t[-1] - t[0])


def sample_intervals(timestamps: np.ndarray) -> np.ndarray | None:
    t = np.asarray(timestamps, dtype=np.float64)
    if t.size < 2:
        return None
    return np.diff(t)


def mean_sample_time(timestamps: np.ndarray) -> float | None:
    """Average inter-sample time, duration / (N - 1).

    N samples bound N - 1 intervals, so the divisor is N - 1: a perfect
    10 Hz stream reports exactly 0.1 s.
    """
    t = np.asarray(timestamps, dtype=np.float64)
    if t.size < 2:
        return None
    return float((t[-1] - t[0]) / (t.size - 1))


def timestamp_mismatch(cam_ts: np.ndarray, other_ts: np.ndarray) -> np.ndarray:
    """Signed offset from each camera timestamp to its nearest counterpart."""
    cam_ts = np.asarray(cam_ts, dtype=np.float64)
    other_ts = np.asarray(other_ts, dtype=np.float64)
    if cam_ts.size == 0 or other_ts.size == 0:
        raise ValueError("empty stream")
    _, offsets = nearest_timestamps(cam_ts, other_ts)
    return offsets
