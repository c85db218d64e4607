"""Corner detection and spatial feature-distribution metrics.

Two detectors ship built in: a FAST segment-test detector and an ORB-style
variant that reranks FAST corners by Harris response and attaches an
intensity-centroid orientation. Counting and distribution logic is
detector-agnostic, so external detectors can plug in as any callable
mapping a gray image to a keypoint list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_ops import box_sum

# radius-3 Bresenham circle in circular order, (dy, dx)
CIRCLE_OFFSETS = (
    (-3, 0), (-3, 1), (-2, 2), (-1, 3), (0, 3), (1, 3), (2, 2), (3, 1),
    (3, 0), (3, -1), (2, -2), (1, -3), (0, -3), (-1, -3), (-2, -2), (-3, -1),
)

HARRIS_K = 0.04
HARRIS_BLOCK = 7
ORIENTATION_RADIUS = 15


@dataclass(frozen=True)
class Keypoint:
    x: int
    y: int
    score: float
    orientation: float | None = None  # radians, ORB-style only


def detect_fast(gray: np.ndarray, threshold: int, arc: int = 9, nonmax: bool = True) -> list[Keypoint]:
    """FAST segment-test corners, raster-ordered.

    A pixel p is a corner when at least ``arc`` contiguous pixels on its
    16-pixel circle are all brighter than p + t or all darker than p - t.
    The score sums |circle - p| over every circle pixel passing the winning
    polarity's test. Non-max suppression keeps a corner only if no 3x3
    neighbor corner outranks it under the total order (score, raster
    position), so ties suppress deterministically.
    """
    img = np.asarray(gray, dtype=np.float64)
    h, w = img.shape
    if h < 7 or w < 7:
        return []
    center = img[3 : h - 3, 3 : w - 3]
    diffs = np.stack(
        [img[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx] - center for dy, dx in CIRCLE_OFFSETS]
    )
    brighter = diffs > threshold
    darker = diffs < -threshold
    corner_bright = np.zeros(center.shape, dtype=bool)
    corner_dark = np.zeros(center.shape, dtype=bool)
    for start in range(16):
        ring = [(start + i) % 16 for i in range(arc)]
        corner_bright |= np.logical_and.reduce(brighter[ring])
        corner_dark |= np.logical_and.reduce(darker[ring])
    corner = corner_bright | corner_dark
    if not corner.any():
        return []
    score_bright = np.where(brighter, diffs, 0.0).sum(axis=0)
    score_dark = np.where(darker, -diffs, 0.0).sum(axis=0)
    score = np.where(corner_bright, score_bright, score_dark)

    full_score = np.zeros((h, w))
    full_corner = np.zeros((h, w), dtype=bool)
    full_score[3 : h - 3, 3 : w - 3] = np.where(corner, score, 0.0)
    full_corner[3 : h - 3, 3 : w - 3] = corner

    if nonmax:
        beaten = np.zeros((h, w), dtype=bool)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                neigh_score = _shift(full_score, dy, dx)
                neigh_corner = _shift(full_corner, dy, dx)
                beats = neigh_corner & (neigh_score > full_score)
                if dy < 0 or (dy == 0 and dx < 0):
                    # the earlier raster position wins score ties
                    beats |= neigh_corner & (neigh_score == full_score)
                beaten |= beats
        full_corner &= ~beaten

    ys, xs = np.nonzero(full_corner)
    return [Keypoint(x=int(x), y=int(y), score=float(full_score[y, x])) for y, x in zip(ys, xs)]


def _shift(arr: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """Array translated by (dy, dx) with zero fill."""
    out = np.zeros_like(arr)
    h, w = arr.shape
    ys = slice(max(0, -dy), min(h, h - dy))
    xs = slice(max(0, -dx), min(w, w - dx))
    out[ys, xs] = arr[max(0, dy) : min(h, h + dy), max(0, dx) : min(w, w + dx)]
    return out


def harris_response_map(gray: np.ndarray, block: int = HARRIS_BLOCK, k: float = HARRIS_K) -> np.ndarray:
    """Harris corner measure det(M) - k tr(M)^2 with block-summed moments."""
    half = block // 2
    padded = np.pad(np.asarray(gray, dtype=np.float64), half + 1, mode="edge")
    ix = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    iy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    sxx = box_sum(ix * ix, block)
    syy = box_sum(iy * iy, block)
    sxy = box_sum(ix * iy, block)
    return (sxx * syy - sxy * sxy) - k * (sxx + syy) ** 2


def orientation(gray: np.ndarray, x: int, y: int, radius: int = ORIENTATION_RADIUS) -> float:
    """Intensity-centroid angle atan2(m01, m10) over a circular patch.

    The patch is clipped to the image, so border keypoints stay defined.
    """
    return float(
        orientations(gray, np.array([x]), np.array([y]), radius)[0]
    )


def orientations(gray: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: int = ORIENTATION_RADIUS) -> np.ndarray:
    """Vectorized intensity-centroid angles for many keypoints at once."""
    img = np.asarray(gray, dtype=np.float64)
    h, w = img.shape
    offs = np.arange(-radius, radius + 1)
    dy = offs[:, None]
    dx = offs[None, :]
    circle = (dy * dy + dx * dx) <= radius * radius
    yy = ys[:, None, None] + dy[None]
    xx = xs[:, None, None] + dx[None]
    inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w) & circle[None]
    vals = img[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)] * inside
    m01 = (vals * dy[None]).sum(axis=(1, 2))
    m10 = (vals * dx[None]).sum(axis=(1, 2))
    return np.arctan2(m01, m10)


def detect_orb_style(
    gray: np.ndarray,
    threshold: int,
    arc: int = 9,
    nonmax: bool = True,
    max_keypoints: int = 0,
) -> list[Keypoint]:
    """FAST corners reranked by Harris response, with orientations attached.

    max_keypoints = 0 keeps every corner (each frame on a texture-rich
    corpus yields thousands; a cap would bias the count metrics).
    """
    if max_keypoints < 0:
        raise ValueError("max_keypoints must be >= 0")
    base = detect_fast(gray, threshold, arc=arc, nonmax=nonmax)
    if not base:
        return []
    harris = harris_response_map(gray)
    ranked = sorted(base, key=lambda kp: (-harris[kp.y, kp.x], kp.y, kp.x))
    if max_keypoints:
        ranked = ranked[:max_keypoints]
    xs = np.array([kp.x for kp in ranked])
    ys = np.array([kp.y for kp in ranked])
    angles = orientations(gray, xs, ys)
    return [
        Keypoint(x=kp.x, y=kp.y, score=float(harris[kp.y, kp.x]), orientation=float(a))
        for kp, a in zip(ranked, angles)
    ]


@dataclass
class FeatureDistribution:
    detector_id: str
    total: int
    avg_per_bin: float
    dist_avg_pct: float  # % of bins holding at least the per-bin average
    dist_abs_pct: float  # % of bins holding at least one keypoint
    bin_dim: int
    bin_total: int


def spatial_distribution(
    keypoints: list[Keypoint], shape: tuple[int, int], bin_dim: int, detector_id: str = ""
) -> FeatureDistribution:
    """Bin keypoints into bin_dim-square tiles and score their spread.

    Boundary keypoints belong to the tile containing their integer pixel
    coordinate. Bin count uses the ceiling partition, so edge bins may be
    smaller yet still count toward the ratios.
    """
    if bin_dim < 8:
        raise ValueError("bin dimension must be >= 8")
    h, w = shape
    rows = math.ceil(h / bin_dim)
    cols = math.ceil(w / bin_dim)
    total_bins = rows * cols
    counts = np.zeros(total_bins, dtype=np.int64)
    for kp in keypoints:
        r = int(kp.y) // bin_dim
        c = int(kp.x) // bin_dim
        counts[r * cols + c] += 1
    f_total = len(keypoints)
    f_avg = f_total / total_bins
    return FeatureDistribution(
        detector_id=detector_id,
        total=f_total,
        avg_per_bin=f_avg,
        dist_avg_pct=float(100.0 * (counts >= f_avg).sum() / total_bins),
        dist_abs_pct=float(100.0 * (counts >= 1).sum() / total_bins),
        bin_dim=bin_dim,
        bin_total=total_bins,
    )
