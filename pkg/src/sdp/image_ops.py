"""Pixel-level primitives shared by the visual engines.

Everything here is a pure function over float arrays: luma conversion,
tiling into sub-images, Laplacian response variance, LAB-style luminance,
and trimmed statistics on intensity histogramless samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def luma(image: np.ndarray) -> np.ndarray:
    """Brightness per pixel: 0.299 R + 0.587 G + 0.114 B; identity on gray."""
    image = np.asarray(image)
    if image.ndim == 2:
        return image.astype(np.float64)
    if image.ndim == 3 and image.shape[2] == 3:
        r, g, b = (image[..., i].astype(np.float64) for i in range(3))
        return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got shape {image.shape}")


@dataclass
class TileGrid:
    """Row-major partition of an image into dim x dim sub-images.

    Edge tiles shrink so the union covers every pixel exactly once.
    """

    rows: int
    cols: int
    dim: int
    tiles: list[np.ndarray]

    @property
    def total(self) -> int:
        return self.rows * self.cols


def tile(image: np.ndarray, dim: int) -> TileGrid:
    if dim < 8:
        raise ValueError("tile dimension must be >= 8")
    h, w = image.shape[:2]
    rows = math.ceil(h / dim)
    cols = math.ceil(w / dim)
    tiles = [
        image[r * dim : min((r + 1) * dim, h), c * dim : min((c + 1) * dim, w)]
        for r in range(rows)
        for c in range(cols)
    ]
    return TileGrid(rows=rows, cols=cols, dim=dim, tiles=tiles)


def laplacian_variance(gray: np.ndarray) -> float | None:
    """Blurring score: population variance of the 4-connected Laplacian.

    The kernel [[0,1,0],[1,-4,1],[0,1,0]] is applied to interior pixels only
    (no padding, so image borders inject no synthetic edges). Regions smaller
    than 3x3 have no interior and return None.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or gray.shape[0] < 3 or gray.shape[1] < 3:
        return None
    center = gray[1:-1, 1:-1]
    resp = gray[:-2, 1:-1] + gray[2:, 1:-1] + gray[1:-1, :-2] + gray[1:-1, 2:] - 4.0 * center
    return float(resp.var())


@dataclass(frozen=True)
class TrimmedStats:
    alpha: float
    mean: float
    std: float | None
    skewness: float | None
    n_kept: int


def trimmed_stats(values: np.ndarray, alpha: float) -> TrimmedStats | None:
    """Mean/std/skewness after dropping floor(n*alpha) samples from each end.

    std uses the n-1 divisor; skewness divides the summed cubed deviations by
    (n_kept - 1) * std^3, so a symmetric sample scores 0 and alpha = 0
    reduces every statistic to its untrimmed form.
    """
    values = np.sort(np.asarray(values, dtype=np.float64).ravel())
    n = values.size
    drop = int(n * alpha)
    kept = values[drop : n - drop]
    n_kept = kept.size
    if n_kept < 2:
        return None
    mean = float(kept.mean())
    dev = kept - mean
    var = float((dev * dev).sum() / (n_kept - 1))
    std = math.sqrt(var)
    if std == 0.0:
        return TrimmedStats(alpha=alpha, mean=mean, std=0.0, skewness=None, n_kept=n_kept)
    # standardized form: dev**3 / std**3 under- and overflows long before
    # (dev/std)**3 does
    skew = float(((dev / std) ** 3).sum() / (n_kept - 1))
    return TrimmedStats(alpha=alpha, mean=mean, std=std, skewness=skew, n_kept=n_kept)


# sRGB gamma + CIE L* pieces for the LAB-style luminance used by contrast
_EPS3 = (6.0 / 29.0) ** 3


def lab_luminance(gray: np.ndarray) -> np.ndarray:
    """CIELAB L* of an achromatic intensity image, rescaled to [0, 255].

    Intensities are treated as sRGB-encoded gray (R = G = B), linearized,
    and mapped through the L* cube-root response.
    """
    c = np.asarray(gray, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    f = np.where(linear > _EPS3, np.cbrt(linear), linear / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lstar = 116.0 * f - 16.0
    return np.clip(lstar, 0.0, 100.0) * (255.0 / 100.0)


def box_sum(values: np.ndarray, window: int) -> np.ndarray:
    """Sliding window sum over both axes; output shrinks by window - 1."""
    s = np.cumsum(np.cumsum(values, axis=0, dtype=np.float64), axis=1)
    s = np.pad(s, ((1, 0), (1, 0)))
    w = window
    return s[w:, w:] - s[:-w, w:] - s[w:, :-w] + s[:-w, :-w]
