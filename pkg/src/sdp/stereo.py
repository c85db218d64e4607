"""Dense stereo disparity: block matching and semi-global aggregation.

Both matchers share the same machinery: a (H, W, D) cost volume over
integer disparities, winner-take-all selection, a uniqueness-ratio check,
and a left-right consistency check. BM costs are block-summed absolute
intensity differences; SGM costs are block-summed Hamming distances of 5x5
census transforms, aggregated along image paths with the standard P1/P2
smoothness recurrence. Costs stay integer-valued, so every step is exact
and runs are bit-reproducible.

Inputs are assumed rectified (true of all supported datasets). Disparities
are integer; invalid pixels are excluded from statistics rather than
zero-filled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_ops import box_sum

CENSUS_WINDOW = 5
INFEASIBLE = 1.0e7  # large finite sentinel; keeps float32 arithmetic exact


@dataclass(frozen=True)
class StereoConfig:
    d_max: int = 128
    block: int = 15
    paths: int = 8
    p1: float = 0.0  # 0 = derive 8 * block^2
    p2: float = 0.0  # 0 = derive 32 * block^2
    uniqueness_pct: float = 10.0
    lr_check: bool = True
    lr_max_diff: int = 1
    # baseline/focal length are descriptive only (d = B f / Z); no metric
    # here depends on them
    baseline_m: float | None = None
    focal_px: float | None = None

    def penalties(self) -> tuple[float, float]:
        w2 = float(self.block) ** 2
        p1 = self.p1 if self.p1 > 0 else 8.0 * w2
        p2 = self.p2 if self.p2 > 0 else 32.0 * w2
        if not p2 > p1 > 0:
            raise ValueError("stereo penalties must satisfy P2 > P1 > 0")
        return p1, p2


@dataclass
class DisparityMap:
    values: np.ndarray  # float32, undefined where ~valid
    valid: np.ndarray  # bool mask
    method: str

    @property
    def valid_count(self) -> int:
        return int(self.valid.sum())

    @property
    def valid_fraction(self) -> float:
        return float(self.valid.mean())


def _check_pair(left: np.ndarray, right: np.ndarray, cfg: StereoConfig) -> None:
    if left.shape != right.shape:
        raise ValueError(f"dimension mismatch: left {left.shape} vs right {right.shape}")
    if left.ndim != 2:
        raise ValueError("stereo inputs must be single-channel")
    if cfg.block < 3 or cfg.block % 2 == 0:
        raise ValueError("block size must be odd and >= 3")
    if left.shape[1] <= cfg.d_max + cfg.block:
        raise ValueError("image width must exceed d_max + block")


def _block_cost_volume(per_pixel: np.ndarray, block: int) -> np.ndarray:
    """Box-sum each disparity slice; output indexed by block-center pixel.

    per_pixel is (D, H, W) with INFEASIBLE where the right pixel falls
    outside the image; the box sum keeps infeasible centers huge, feasible
    centers exact.
    """
    d, h, w = per_pixel.shape
    half = block // 2
    out = np.full((d, h, w), INFEASIBLE * block * block, dtype=np.float32)
    for i in range(d):
        out[i, half : h - half, half : w - half] = box_sum(per_pixel[i], block).astype(np.float32)
    return out


def _per_pixel_abs_diff(left: np.ndarray, right: np.ndarray, d_max: int) -> np.ndarray:
    h, w = left.shape
    lf = left.astype(np.float32)
    rf = right.astype(np.float32)
    vol = np.full((d_max, h, w), INFEASIBLE, dtype=np.float32)
    for d in range(d_max):
        if d == 0:
            vol[d] = np.abs(lf - rf)
        else:
            vol[d, :, d:] = np.abs(lf[:, d:] - rf[:, :-d])
    return vol


def census_transform(gray: np.ndarray, window: int = CENSUS_WINDOW) -> np.ndarray:
    """Per-pixel census code: one bit per neighbor, set when neighbor < center.

    Border pixels use edge replication so the code is defined everywhere.
    """
    half = window // 2
    img = np.asarray(gray, dtype=np.float64)
    padded = np.pad(img, half, mode="edge")
    h, w = img.shape
    code = np.zeros((h, w), dtype=np.uint32)
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            if dy == 0 and dx == 0:
                continue
            neighbor = padded[half + dy : half + dy + h, half + dx : half + dx + w]
            code = (code << np.uint32(1)) | (neighbor < img).astype(np.uint32)
    return code


def _per_pixel_census_cost(left: np.ndarray, right: np.ndarray, d_max: int) -> np.ndarray:
    h, w = left.shape
    cl = census_transform(left)
    cr = census_transform(right)
    vol = np.full((d_max, h, w), INFEASIBLE, dtype=np.float32)
    for d in range(d_max):
        if d == 0:
            vol[d] = np.bitwise_count(cl ^ cr).astype(np.float32)
        else:
            vol[d, :, d:] = np.bitwise_count(cl[:, d:] ^ cr[:, :-d]).astype(np.float32)
    return vol


def _winner_take_all(cost: np.ndarray, cfg: StereoConfig, method: str) -> DisparityMap:
    """Select disparities and invalidate ambiguous or inconsistent pixels.

    cost is (D, H, W). The uniqueness check drops a pixel when the best cost
    outside the winner's +/-1 neighborhood comes within uniqueness_pct of the
    winner. The left-right check derives the right-image disparity from the
    same volume (cost_R(x, d) = cost_L(x + d, d)) and drops pixels whose
    projected disparity disagrees by more than lr_max_diff.
    """
    d_max, h, w = cost.shape
    best_d = cost.argmin(axis=0)
    best_cost = np.take_along_axis(cost, best_d[None], axis=0)[0]
    valid = best_cost < INFEASIBLE

    if cfg.uniqueness_pct > 0:
        masked = cost.copy()
        d_idx = np.arange(d_max).reshape(-1, 1, 1)
        masked[np.abs(d_idx - best_d[None]) <= 1] = np.inf
        second = masked.min(axis=0)
        # a pixel with no feasible competitor cannot demonstrate uniqueness
        valid &= (second < INFEASIBLE) & (second > best_cost * (1.0 + cfg.uniqueness_pct / 100.0))

    if cfg.lr_check:
        cost_r = np.full_like(cost, INFEASIBLE)
        for d in range(d_max):
            if d == 0:
                cost_r[d] = cost[d]
            else:
                cost_r[d, :, : w - d] = cost[d, :, d:]
        best_d_r = cost_r.argmin(axis=0)
        xr = np.arange(w)[None, :] - best_d
        xr_clipped = np.clip(xr, 0, w - 1)
        d_r_at_match = np.take_along_axis(best_d_r, xr_clipped, axis=1)
        valid &= (xr >= 0) & (np.abs(best_d - d_r_at_match) <= cfg.lr_max_diff)

    return DisparityMap(values=best_d.astype(np.float32), valid=valid, method=method)


def disparity_bm(left: np.ndarray, right: np.ndarray, cfg: StereoConfig) -> DisparityMap:
    """Block matching: argmin of block-summed absolute differences."""
    _check_pair(left, right, cfg)
    per_pixel = _per_pixel_abs_diff(left, right, cfg.d_max)
    cost = _block_cost_volume(per_pixel, cfg.block)
    return _winner_take_all(cost, cfg, method="BM")


def _aggregate_direction(cost: np.ndarray, dy: int, dx: int, p1: float, p2: float) -> np.ndarray:
    """One-direction semi-global aggregation.

    cost is (H, W, D). The recurrence is

        L(p, d) = C(p, d) + min(L(q, d), L(q, d+/-1) + P1, min_d' L(q, d') + P2)
                  - min_d' L(q, d')

    with q the predecessor of p along (dy, dx); pixels without a predecessor
    start at their raw cost.
    """
    h, w, d_max = cost.shape
    out = np.empty_like(cost)

    def step(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
        m = prev.min(axis=-1, keepdims=True)
        up = np.empty_like(prev)
        up[..., :-1] = prev[..., 1:]
        up[..., -1] = np.inf
        down = np.empty_like(prev)
        down[..., 1:] = prev[..., :-1]
        down[..., 0] = np.inf
        best = np.minimum(prev, np.minimum(up, down) + np.float32(p1))
        best = np.minimum(best, m + np.float32(p2))
        return cur + best - m

    if dy == 0:
        cols = range(w) if dx > 0 else range(w - 1, -1, -1)
        first = True
        prev = None
        for x in cols:
            out[:, x] = cost[:, x] if first else step(prev, cost[:, x])
            prev = out[:, x]
            first = False
        return out

    rows = range(h) if dy > 0 else range(h - 1, -1, -1)
    first = True
    prev_row = None
    for y in rows:
        if first:
            out[y] = cost[y]
        else:
            if dx == 0:
                shifted = prev_row
                no_pred = None
            elif dx > 0:
                shifted = np.empty_like(prev_row)
                shifted[1:] = prev_row[:-1]
                shifted[0] = prev_row[0]  # dummy; overwritten below
                no_pred = slice(0, 1)
            else:
                shifted = np.empty_like(prev_row)
                shifted[:-1] = prev_row[1:]
                shifted[-1] = prev_row[-1]
                no_pred = slice(w - 1, w)
            out[y] = step(shifted, cost[y])
            if no_pred is not None:
                out[y, no_pred] = cost[y, no_pred]
        prev_row = out[y]
        first = False
    return out


_PATHS_8 = ((0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (1, -1), (-1, 1), (-1, -1))
_PATHS_4 = ((0, 1), (0, -1), (1, 0), (-1, 0))


def disparity_sgm(left: np.ndarray, right: np.ndarray, cfg: StereoConfig) -> DisparityMap:
    """Semi-global matching over block-summed census/Hamming costs."""
    _check_pair(left, right, cfg)
    if cfg.paths not in (4, 8):
        raise ValueError("path count must be 4 or 8")
    p1, p2 = cfg.penalties()
    per_pixel = _per_pixel_census_cost(left, right, cfg.d_max)
    cost = _block_cost_volume(per_pixel, cfg.block)
    cost_hwd = np.ascontiguousarray(np.moveaxis(cost, 0, -1))
    directions = _PATHS_8 if cfg.paths == 8 else _PATHS_4
    total = np.zeros(cost_hwd.shape, dtype=np.float64)
    for dy, dx in directions:
        total += _aggregate_direction(cost_hwd, dy, dx, p1, p2)
    # renormalize the infeasible sentinel so WTA/uniqueness see one scale
    total = np.moveaxis(total, -1, 0) / len(directions)
    capped = np.minimum(total, INFEASIBLE * cfg.block * cfg.block).astype(np.float64)
    return _winner_take_all(capped, cfg, method="SGM")


def disparity_stats(disp: DisparityMap) -> tuple[float, float] | None:
    """Mean and population std over valid pixels; None when nothing is valid."""
    if disp.valid_count == 0:
        return None
    vals = disp.values[disp.valid].astype(np.float64)
    return float(vals.mean()), float(vals.std())
