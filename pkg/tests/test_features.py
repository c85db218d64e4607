import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdp.features import (
    CIRCLE_OFFSETS,
    Keypoint,
    detect_fast,
    detect_orb_style,
    harris_response_map,
    spatial_distribution,
)


def oracle_fast(img, t, arc=9, nonmax=True):
    """Brute-force segment test with the same score and suppression rules.

    Written with explicit loops, independent of the vectorized detector.
    """
    img = np.asarray(img, dtype=float)
    h, w = img.shape
    detections = {}
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            p = img[y, x]
            brighter = [img[y + dy, x + dx] > p + t for dy, dx in CIRCLE_OFFSETS]
            darker = [img[y + dy, x + dx] < p - t for dy, dx in CIRCLE_OFFSETS]

            def has_run(flags):
                return any(all(flags[(s + i) % 16] for i in range(arc)) for s in range(16))

            is_bright, is_dark = has_run(brighter), has_run(darker)
            if not (is_bright or is_dark):
                continue
            if is_bright:
                score = sum(
                    img[y + dy, x + dx] - p for (dy, dx), f in zip(CIRCLE_OFFSETS, brighter) if f
                )
            else:
                score = sum(
                    p - img[y + dy, x + dx] for (dy, dx), f in zip(CIRCLE_OFFSETS, darker) if f
                )
            detections[(y, x)] = score
    if not nonmax:
        return sorted(detections)
    survivors = []
    for (y, x), score in detections.items():
        beaten = False
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                neighbor = (y + dy, x + dx)
                if neighbor in detections:
                    ns = detections[neighbor]
                    if ns > score or (ns == score and neighbor < (y, x)):
                        beaten = True
        if not beaten:
            survivors.append((y, x))
    return sorted(survivors)


class TestFast:
    def test_constant_image(self):
        assert detect_fast(np.full((32, 32), 50.0), 10) == []

    def test_bright_square_corners(self):
        img = np.zeros((20, 20), dtype=np.uint8)
        img[5:15, 5:15] = 200
        kps = detect_fast(img, 10)
        assert sorted((kp.y, kp.x) for kp in kps) == [(5, 5), (5, 14), (14, 5), (14, 14)]

    def test_matches_oracle_with_and_without_nms(self, rng):
        for _ in range(6):
            img = rng.integers(0, 256, size=(40, 40)).astype(np.uint8)
            for nonmax in (True, False):
                mine = [(kp.y, kp.x) for kp in detect_fast(img, 12, nonmax=nonmax)]
                assert mine == oracle_fast(img, 12, nonmax=nonmax)

    def test_survivors_are_local_maxima(self, rng):
        img = rng.integers(0, 256, size=(48, 48)).astype(np.uint8)
        raw = {(kp.y, kp.x): kp.score for kp in detect_fast(img, 10, nonmax=False)}
        kept = detect_fast(img, 10, nonmax=True)
        kept_set = {(kp.y, kp.x) for kp in kept}
        assert kept_set <= set(raw)
        for kp in kept:
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    neighbor = (kp.y + dy, kp.x + dx)
                    if neighbor in raw and neighbor != (kp.y, kp.x):
                        assert raw[neighbor] <= kp.score

    def test_offset_invariance(self, rng):
        img = rng.integers(30, 200, size=(32, 32)).astype(np.float64)
        a = [(kp.y, kp.x) for kp in detect_fast(img, 10)]
        b = [(kp.y, kp.x) for kp in detect_fast(img + 20.0, 10)]
        assert a == b

    def test_max_threshold_detects_nothing(self, rng):
        img = rng.integers(0, 256, size=(32, 32)).astype(np.uint8)
        assert detect_fast(img, 254) == []

    def test_tiny_image(self):
        assert detect_fast(np.zeros((6, 6)), 10) == []


class TestOrbStyle:
    def _corner_image(self):
        img = np.zeros((48, 48))
        img[8:40, 8:40] = 30.0  # weak square
        img[20:28, 20:28] = 255.0  # strong center block
        return img

    def test_strongest_harris_ranks_first(self, rng):
        img = rng.integers(0, 60, size=(48, 64)).astype(float)
        img[10:30, 10:30] += 180.0
        kps = detect_orb_style(img, 15)
        harris = harris_response_map(img)
        responses = [harris[kp.y, kp.x] for kp in kps]
        assert responses == sorted(responses, reverse=True)

    def test_k_zero_keeps_all_and_truncation_works(self, rng):
        img = rng.integers(0, 256, size=(48, 48)).astype(np.uint8)
        all_kps = detect_orb_style(img, 10, max_keypoints=0)
        top = detect_orb_style(img, 10, max_keypoints=3)
        assert len(top) == min(3, len(all_kps))
        assert [(k.y, k.x) for k in top] == [(k.y, k.x) for k in all_kps[:3]]

    def test_rotating_image_rotates_orientations(self, rng):
        img = rng.integers(0, 256, size=(64, 64)).astype(np.uint8)
        kps = [kp for kp in detect_orb_style(img, 20) if 20 <= kp.x < 44 and 20 <= kp.y < 44]
        assert kps, "fixture must contain interior keypoints"
        rotated = np.rot90(img, k=-1)  # 90 degrees clockwise
        h = img.shape[0]
        checked = 0
        for kp in kps[:10]:
            # (y, x) maps to (x, h-1-y) under clockwise rot90
            match = detect_orb_style(rotated, 20)
            target = [m for m in match if (m.y, m.x) == (kp.x, h - 1 - kp.y)]
            if not target:
                continue
            expected = kp.orientation + math.pi / 2
            diff = (target[0].orientation - expected + math.pi) % (2 * math.pi) - math.pi
            assert abs(diff) <= math.radians(5.0)
            checked += 1
        assert checked >= 3


class TestSpatialDistribution:
    def test_ceiling_bins(self):
        kps = [Keypoint(x=0, y=0, score=1.0)] * 100
        dist = spatial_distribution(kps, (200, 300), 100)
        assert dist.bin_total == 6
        assert dist.avg_per_bin == pytest.approx(100 / 6)

    def test_all_in_one_bin(self):
        kps = [Keypoint(x=5, y=5, score=1.0) for _ in range(10)]
        dist = spatial_distribution(kps, (200, 300), 100)
        assert dist.dist_abs_pct == pytest.approx(100 / 6)
        assert dist.dist_avg_pct == pytest.approx(100 / 6)

    def test_uniform_coverage(self):
        kps = [
            Keypoint(x=c * 100 + 1, y=r * 100 + 1, score=1.0) for r in range(2) for c in range(3)
        ]
        dist = spatial_distribution(kps, (200, 300), 100)
        assert dist.avg_per_bin == pytest.approx(1.0)
        assert dist.dist_avg_pct == 100.0
        assert dist.dist_abs_pct == 100.0

    def test_boundary_keypoint_floors_into_tile(self):
        dist = spatial_distribution([Keypoint(x=100, y=0, score=1.0)], (200, 300), 100)
        assert dist.dist_abs_pct == pytest.approx(100 / 6)

    @given(
        n=st.integers(min_value=0, max_value=200),
        seed=st.integers(min_value=0, max_value=1000),
        bin_dim=st.integers(min_value=8, max_value=80),
    )
    @settings(max_examples=50)
    def test_bins_partition_keypoints(self, n, seed, bin_dim):
        rng = np.random.default_rng(seed)
        kps = [
            Keypoint(x=int(x), y=int(y), score=0.0)
            for x, y in zip(rng.integers(0, 300, n), rng.integers(0, 200, n))
        ]
        dist = spatial_distribution(kps, (200, 300), bin_dim)
        assert dist.total == n
        occupied = dist.dist_abs_pct * dist.bin_total / 100.0
        assert occupied <= min(n, dist.bin_total) + 1e-9
