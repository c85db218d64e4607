"""Per-frame visual characterization: brightness, exposure, contrast, blur.

All operations consume a luma image (float, [0, 255]); the dataset handler
converts RGB frames once per frame. Sequence-level reductions (threshold
ratios, class percentages, blurred-image ratios) live here too so every
engine reports through one vocabulary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import finite_difference
from .image_ops import lab_luminance, laplacian_variance, tile, trimmed_stats


@dataclass
class BrightnessSeries:
    brightness: np.ndarray  # per-frame mean luma
    derivative: np.ndarray  # dBr/dt at interval midpoints
    derivative_t: np.ndarray
    beta: np.ndarray  # zero-mean derivative
    sigma: float  # population std of the derivative
    exceed_pct: dict[int, float]  # k -> % of |beta| > k * sigma


def brightness_series(brightness: np.ndarray, timestamps: np.ndarray) -> BrightnessSeries:
    """Zero-mean brightness rate of change and its sigma-threshold ratios.

    beta is the derivative minus the derivative's own mean (subtracting the
    raw-brightness mean would mix units). Ratios count strict exceedance of
    1, 2, and 3 sigma.
    """
    brightness = np.asarray(brightness, dtype=np.float64)
    if brightness.size < 2:
        raise ValueError("too short")
    deriv, mid = finite_difference(brightness, timestamps)
    beta = deriv - deriv.mean()
    sigma = float(deriv.std())
    exceed = {}
    for k in (1, 2, 3):
        if sigma == 0.0:
            exceed[k] = 0.0
        else:
            exceed[k] = float(100.0 * (np.abs(beta) > k * sigma).mean())
    return BrightnessSeries(
        brightness=brightness,
        derivative=deriv,
        derivative_t=mid,
        beta=beta,
        sigma=sigma,
        exceed_pct=exceed,
    )


class ExposureClass(enum.Enum):
    BLACK = "black"
    UNDER = "under"
    PROPER = "proper"
    OVER = "over"
    WHITE = "white"


N_ZONES = 7


def classify_exposure(
    gray: np.ndarray, alpha: float, n_zones: int = N_ZONES
) -> tuple[int, ExposureClass, float, float | None]:
    """Zone index and exposure class from trimmed mean and trimmed skewness.

    The intensity range splits into n_zones equal zones (seven by default).
    Zone 0 is a black image and the last zone a white one; zone 1 with
    right-skewed intensities is under-exposed, the second-to-last zone with
    left-skewed intensities over-exposed, and everything else properly
    exposed.

    Returns (zone, class, trimmed mean, trimmed skewness).
    """
    if n_zones < 4:
        raise ValueError("need at least 4 exposure zones")
    stats = trimmed_stats(np.asarray(gray).ravel(), alpha)
    if stats is None:
        raise ValueError("image too small to classify")
    zone = min(int(stats.mean / (255.0 / n_zones)), n_zones - 1)
    skew = stats.skewness
    if zone == 0:
        cls = ExposureClass.BLACK
    elif zone == n_zones - 1:
        cls = ExposureClass.WHITE
    elif zone == 1 and skew is not None and skew > 0:
        cls = ExposureClass.UNDER
    elif zone == n_zones - 2 and skew is not None and skew < 0:
        cls = ExposureClass.OVER
    else:
        cls = ExposureClass.PROPER
    return zone, cls, stats.mean, skew


@dataclass
class ContrastReport:
    cr: float | None  # contrast ratio, x100
    weber: float | None  # cr - 100
    michelson: float  # x100
    rms: float  # population std of luminance


def contrast(gray: np.ndarray, alpha: float, use_lab: bool = True) -> ContrastReport:
    """Four classical contrast scores over the luminance channel.

    Luminance is the LAB-style L* response of the luma image (rescaled to
    [0, 255]); use_lab=False keeps plain luma for corpora where the
    perceptual mapping is unwanted. Target luminance is the trimmed mean,
    background the arithmetic mean, so a right-skewed image lands just below
    a contrast ratio of 100.
    """
    lum = lab_luminance(gray) if use_lab else np.asarray(gray, dtype=np.float64)
    flat = lum.ravel()
    l_max = float(flat.max())
    l_min = float(flat.min())
    l_background = float(flat.mean())
    stats = trimmed_stats(flat, alpha)
    l_target = stats.mean if stats is not None else l_background
    if l_background == 0.0:
        cr = None
        weber = None
    else:
        cr = 100.0 * l_target / l_background
        weber = cr - 100.0
    denom = l_max + l_min
    michelson = 0.0 if denom == 0.0 else 100.0 * (l_max - l_min) / denom
    return ContrastReport(cr=cr, weber=weber, michelson=michelson, rms=float(flat.std()))


@dataclass
class BlurReport:
    score: float  # whole-image Laplacian variance
    tile_scores: list[float | None]
    blurred_tile_pct: float
    threshold: float


def blur_report(gray: np.ndarray, tile_dim: int, threshold: float) -> BlurReport:
    """Whole-image blurring score plus the share of blurred sub-images.

    A tile is blurred when its Laplacian variance falls strictly below the
    threshold (few edges, little high-frequency energy). Tiles too small for
    a Laplacian interior count as blurred; they carry no edge evidence.
    """
    score = laplacian_variance(gray)
    if score is None:
        raise ValueError("image smaller than 3x3")
    grid = tile(gray, tile_dim)
    tile_scores = [laplacian_variance(t) for t in grid.tiles]
    blurred = sum(1 for s in tile_scores if s is None or s < threshold)
    return BlurReport(
        score=score,
        tile_scores=tile_scores,
        blurred_tile_pct=100.0 * blurred / grid.total,
        threshold=threshold,
    )


def blurred_image_ratios(tile_pcts: np.ndarray, cuts=(0.0, 50.0, 90.0)) -> dict[float, float]:
    """Share of images whose blurred-tile percentage strictly exceeds each cut."""
    tile_pcts = np.asarray(tile_pcts, dtype=np.float64)
    if tile_pcts.size == 0:
        raise ValueError("no images")
    return {cut: float(100.0 * (tile_pcts > cut).mean()) for cut in cuts}
