"""Generate a small synthetic visual-inertial corpus for demos and tests.

Builds one KITTI-layout dataset and one ASL-layout dataset under the given
root. Frames are crops of a large textured field sliding with the simulated
camera, with per-sequence brightness drift and occasional smoothing, so
every visual engine sees non-trivial input; the ASL dataset also gets a
stereo pair (constant-disparity shifted crops) and an IMU stream with a
tilting gravity vector. Everything derives from one seed, so two builds are
identical.

Usage: python scripts/make_demo_dataset.py <out_dir> [--seed N]
"""

from __future__ import annotations

import argparse
import os

import numpy as np
from PIL import Image

GRAVITY = 9.80665


def _texture(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    """Band-limited random field: sharp texture with coarse structure."""
    coarse = rng.integers(0, 256, size=(height // 8 + 2, width // 8 + 2)).astype(np.float64)
    coarse = np.kron(coarse, np.ones((8, 8)))[:height, :width]
    fine = rng.integers(0, 256, size=(height, width)).astype(np.float64)
    return 0.6 * coarse + 0.4 * fine


def _box_blur(img: np.ndarray, passes: int) -> np.ndarray:
    out = img.astype(np.float64)
    for _ in range(passes):
        padded = np.pad(out, 1, mode="edge")
        out = (
            padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
            + padded[1:-1, :-2] + padded[1:-1, 1:-1] + padded[1:-1, 2:]
            + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
        ) / 9.0
    return out


def _save_gray(img: np.ndarray, path: str) -> None:
    Image.fromarray(np.clip(img, 0, 255).astype(np.uint8), mode="L").save(path)


def _render_sequence(rng, n_frames: int, size: tuple[int, int], disparity: int):
    """Yield (left, right) frame pairs sliding over a shared textured field."""
    h, w = size
    field = _texture(rng, h + 40, w + disparity + n_frames * 4 + 40)
    gain_phase = rng.uniform(0, np.pi)
    for i in range(n_frames):
        x0 = 20 + i * 4
        y0 = 20 + int(6 * np.sin(i / 5.0))
        left = field[y0 : y0 + h, x0 + disparity : x0 + disparity + w]
        right = field[y0 : y0 + h, x0 : x0 + w]
        gain = 0.75 + 0.25 * np.sin(i / 4.0 + gain_phase)
        left, right = left * gain, right * gain
        if i % 7 == 3:  # sprinkle blurred frames
            left, right = _box_blur(left, 2), _box_blur(right, 2)
        yield left, right


def build_kitti(root: str, n_sequences: int = 2, n_frames: int = 10, size=(64, 96), seed: int = 0) -> str:
    rng = np.random.default_rng(seed)
    for s in range(n_sequences):
        seq_dir = os.path.join(root, "sequences", f"{s:02d}")
        os.makedirs(os.path.join(seq_dir, "image_0"), exist_ok=True)
        os.makedirs(os.path.join(seq_dir, "image_1"), exist_ok=True)
        dt = 0.1 + 0.01 * s
        with open(os.path.join(seq_dir, "times.txt"), "w", encoding="utf-8") as fh:
            for i in range(n_frames):
                fh.write(f"{i * dt:.6e}\n")
        for i, (left, right) in enumerate(_render_sequence(rng, n_frames, size, disparity=4)):
            _save_gray(left, os.path.join(seq_dir, "image_0", f"{i:06d}.png"))
            _save_gray(right, os.path.join(seq_dir, "image_1", f"{i:06d}.png"))
    return root


def _imu_rows(rng, n_samples: int, t0_ns: int, dt_ns: int):
    """EuroC-format rows: timestamp, gyro rad/s (x3), accel m/s^2 (x3)."""
    for i in range(n_samples):
        t = i * dt_ns * 1e-9
        tilt = 0.15 * np.sin(2 * np.pi * 0.4 * t)
        gyro = np.array(
            [0.3 * np.sin(2 * np.pi * 0.7 * t), 0.2 * np.cos(2 * np.pi * 0.5 * t), 0.1]
        ) + rng.normal(0, 0.01, 3)
        accel = np.array(
            [
                GRAVITY * np.sin(tilt) + 0.4 * np.sin(2 * np.pi * 1.3 * t),
                0.3 * np.cos(2 * np.pi * 0.9 * t),
                GRAVITY * np.cos(tilt),
            ]
        ) + rng.normal(0, 0.02, 3)
        yield t0_ns + i * dt_ns, gyro, accel


def build_asl(
    root: str,
    name: str = "demo_asl",
    n_sequences: int = 3,
    n_frames: int = 30,
    n_imu: int = 300,
    size=(64, 96),
    seed: int = 1,
) -> str:
    rng = np.random.default_rng(seed)
    base_ns = 1_500_000_000_000_000_000
    for s in range(n_sequences):
        mav = os.path.join(root, f"seq{s:02d}", "mav0")
        cam_dt_ns = 50_000_000
        imu_dt_ns = 5_000_000
        t0 = base_ns + s * 10_000_000_000
        for cam in ("cam0", "cam1"):
            os.makedirs(os.path.join(mav, cam, "data"), exist_ok=True)
        rows0, rows1 = [], []
        for i, (left, right) in enumerate(_render_sequence(rng, n_frames, size, disparity=6)):
            ts = t0 + i * cam_dt_ns
            _save_gray(left, os.path.join(mav, "cam0", "data", f"{ts}.png"))
            _save_gray(right, os.path.join(mav, "cam1", "data", f"{ts}.png"))
            rows0.append((ts, f"{ts}.png"))
            rows1.append((ts, f"{ts}.png"))
        for cam, rows in (("cam0", rows0), ("cam1", rows1)):
            with open(os.path.join(mav, cam, "data.csv"), "w", encoding="utf-8") as fh:
                fh.write("#timestamp [ns],filename\n")
                for ts, fname in rows:
                    fh.write(f"{ts},{fname}\n")
        os.makedirs(os.path.join(mav, "imu0"), exist_ok=True)
        with open(os.path.join(mav, "imu0", "data.csv"), "w", encoding="utf-8") as fh:
            fh.write(
                "#timestamp [ns],w_RS_S_x [rad s^-1],w_RS_S_y [rad s^-1],w_RS_S_z [rad s^-1],"
                "a_RS_S_x [m s^-2],a_RS_S_y [m s^-2],a_RS_S_z [m s^-2]\n"
            )
            for ts, gyro, accel in _imu_rows(rng, n_imu, t0, imu_dt_ns):
                fh.write(
                    f"{ts},{gyro[0]:.9f},{gyro[1]:.9f},{gyro[2]:.9f},"
                    f"{accel[0]:.9f},{accel[1]:.9f},{accel[2]:.9f}\n"
                )
    return root


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    kitti_root = os.path.join(args.out_dir, "kitti_demo")
    asl_root = os.path.join(args.out_dir, "asl_demo")
    build_kitti(kitti_root, seed=args.seed)
    build_asl(asl_root, seed=args.seed + 1)
    print(f"wrote {kitti_root} and {asl_root}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
