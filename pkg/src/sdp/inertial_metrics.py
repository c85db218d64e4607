"""Motion-profile characterization of IMU streams.

Jerk and snap are the first and second forward-difference derivatives of
body-frame acceleration; angular acceleration and angular jerk are the same
derivatives of angular rate. Saturation metrics compare each axis against
its rail limits, and rotation-only motion is flagged wherever the
accelerometer magnitude stays inside a band around gravity (no detectable
linear acceleration).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ImuSeries, finite_difference

GRAVITY = 9.80665  # m/s^2


@dataclass
class InertialDerivatives:
    jerk: np.ndarray  # (N-1, 3) m/s^3
    jerk_t: np.ndarray
    snap: np.ndarray  # (N-2, 3) m/s^4
    snap_t: np.ndarray
    alpha: np.ndarray  # (N-1, 3) deg/s^2
    alpha_t: np.ndarray
    # second gyro derivative; deg/s^3 (one differentiation order below the
    # deg/s^4 sometimes quoted for it)
    phi: np.ndarray
    phi_t: np.ndarray


def derivatives(series: ImuSeries) -> InertialDerivatives | None:
    """First and second derivatives of accel and gyro at exact sample times."""
    if len(series) < 2:
        return None
    jerk, jerk_t = finite_difference(series.accel, series.t)
    alpha, alpha_t = finite_difference(series.gyro, series.t)
    if len(series) >= 3:
        snap, snap_t = finite_difference(jerk, jerk_t)
        phi, phi_t = finite_difference(alpha, alpha_t)
    else:
        snap = np.empty((0, 3))
        snap_t = np.empty(0)
        phi = np.empty((0, 3))
        phi_t = np.empty(0)
    return InertialDerivatives(jerk, jerk_t, snap, snap_t, alpha, alpha_t, phi, phi_t)


def dr_coverage(axis: np.ndarray, limit: float) -> float:
    """Percent of the sensor's dynamic range (2 * limit) the series spans."""
    axis = np.asarray(axis, dtype=np.float64)
    if axis.size == 0:
        raise ValueError("empty series")
    if limit <= 0:
        raise ValueError("limit must be positive")
    return float(100.0 * (axis.max() - axis.min()) / (2.0 * limit))


def dr_crossing(axis: np.ndarray, limit: float, margin_ratio: float) -> float:
    """Percent of samples within margin_ratio of either rail (|x| >= (1-r)L)."""
    axis = np.asarray(axis, dtype=np.float64)
    if not 0 < margin_ratio < 1:
        raise ValueError("margin ratio must lie in (0, 1)")
    if axis.size == 0:
        raise ValueError("empty series")
    near_rail = np.abs(axis) >= (1.0 - margin_ratio) * limit
    return float(100.0 * near_rail.mean())


@dataclass
class RotationOnlyReport:
    magnitude: np.ndarray  # per-sample |f|, m/s^2
    flags: np.ndarray  # per-sample 0/1
    percentage: float
    gravity: float
    band_ratio: float


def rotation_only(series: ImuSeries, gravity: float = GRAVITY, band_ratio: float = 0.10) -> RotationOnlyReport:
    """Flag samples whose accel magnitude sits within band_ratio of gravity.

    The band absorbs IMU non-idealities and Coriolis terms; a flagged sample
    carries no detectable linear acceleration, so a high percentage marks a
    rotation-only (or stationary) motion profile.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    magnitude = np.linalg.norm(series.accel, axis=1)
    flags = (np.abs(magnitude - gravity) <= band_ratio * gravity).astype(np.float64)
    return RotationOnlyReport(
        magnitude=magnitude,
        flags=flags,
        percentage=float(100.0 * flags.mean()),
        gravity=gravity,
        band_ratio=band_ratio,
    )
