import os

import numpy as np
import pytest

import make_demo_dataset
from sdp.manifest import (
    AdaptError,
    adapt_asl,
    adapt_kitti,
    load_imu_series,
    load_manifest,
    manifest_from_dict,
    manifest_to_dict,
    save_manifest,
    validate_manifest,
)


def write_kitti_sequence(root, name="00", n=5, times=None):
    seq = root / "sequences" / name
    (seq / "image_0").mkdir(parents=True)
    (seq / "image_1").mkdir(parents=True)
    times = times if times is not None else [i * 0.1 for i in range(n)]
    (seq / "times.txt").write_text("".join(f"{t:.6e}\n" for t in times))
    from PIL import Image

    for i in range(n):
        img = Image.fromarray(np.full((8, 8), i * 10, dtype=np.uint8))
        img.save(seq / "image_0" / f"{i:06d}.png")
        img.save(seq / "image_1" / f"{i:06d}.png")
    return seq


def write_asl_sequence(root, name="seqA", n_cam=10, n_imu=100, cam1=True):
    mav = root / name / "mav0"
    base = 1_400_000_000_000_000_000
    cams = ["cam0", "cam1"] if cam1 else ["cam0"]
    from PIL import Image

    for cam in cams:
        (mav / cam / "data").mkdir(parents=True)
        with open(mav / cam / "data.csv", "w") as fh:
            fh.write("#timestamp [ns],filename\n")
            for i in range(n_cam):
                ts = base + i * 50_000_000
                fh.write(f"{ts},{ts}.png\n")
                Image.fromarray(np.full((8, 8), i, dtype=np.uint8)).save(
                    mav / cam / "data" / f"{ts}.png"
                )
    (mav / "imu0").mkdir(parents=True)
    with open(mav / "imu0" / "data.csv", "w") as fh:
        fh.write("#timestamp,...\n")
        for i in range(n_imu):
            ts = base + i * 5_000_000
            fh.write(f"{ts},0.1,0.0,-0.1,0.0,0.0,9.81\n")
    return mav


class TestKittiAdaptor:
    def test_fixture_tree(self, tmp_path):
        write_kitti_sequence(tmp_path, n=5)
        manifest = adapt_kitti(str(tmp_path))
        assert len(manifest.sequences) == 1
        entry = manifest.sequences[0]
        assert len(entry.cameras["cam_left"].files) == 5
        assert len(entry.cameras["cam_right"].files) == 5
        assert entry.imu is None

    def test_count_mismatch(self, tmp_path):
        seq = write_kitti_sequence(tmp_path, n=5)
        (seq / "times.txt").write_text("".join(f"{i * 0.1:.6e}\n" for i in range(4)))
        with pytest.raises(AdaptError, match="count mismatch"):
            adapt_kitti(str(tmp_path))

    def test_missing_times(self, tmp_path):
        seq = write_kitti_sequence(tmp_path)
        os.remove(seq / "times.txt")
        with pytest.raises(AdaptError, match="times.txt"):
            adapt_kitti(str(tmp_path))

    def test_epoch_normalization(self, tmp_path):
        write_kitti_sequence(tmp_path, times=[100.0, 100.1, 100.2, 100.3, 100.4])
        manifest = adapt_kitti(str(tmp_path))
        ts = manifest.sequences[0].cameras["cam_left"].timestamps
        assert ts[0] == 0.0
        assert ts[-1] == pytest.approx(0.4)


class TestAslAdaptor:
    def test_fixture_counts(self, tmp_path):
        write_asl_sequence(tmp_path, n_cam=10, n_imu=100)
        manifest = adapt_asl(str(tmp_path), "fixture")
        entry = manifest.sequences[0]
        assert len(entry.cameras["cam_left"].timestamps) == 10
        assert entry.imu.count == 100
        assert entry.imu.gyro_unit == "rad/s"

    def test_timestamps_normalized_to_seconds(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "fixture")
        ts = manifest.sequences[0].cameras["cam_left"].timestamps
        assert ts[0] == 0.0
        assert ts[1] == pytest.approx(0.05)

    def test_malformed_imu_row(self, tmp_path):
        mav = write_asl_sequence(tmp_path)
        with open(mav / "imu0" / "data.csv", "a") as fh:
            fh.write("123,0.1,0.2,0.3,0.4,0.5\n")  # 6 columns
        with pytest.raises(AdaptError, match="malformed row"):
            adapt_asl(str(tmp_path), "fixture")

    def test_missing_cam0(self, tmp_path):
        mav = write_asl_sequence(tmp_path)
        os.remove(mav / "cam0" / "data.csv")
        with pytest.raises(AdaptError, match="cam0"):
            adapt_asl(str(tmp_path), "fixture")

    def test_gyro_converted_to_deg(self, tmp_path):
        write_asl_sequence(tmp_path, n_imu=10)
        manifest = adapt_asl(str(tmp_path), "fixture")
        imu = load_imu_series(manifest.sequences[0])
        assert imu.gyro[0, 0] == pytest.approx(0.1 * 180 / np.pi)
        assert imu.gyro[0, 2] == pytest.approx(-0.1 * 180 / np.pi)
        assert imu.accel[0, 2] == pytest.approx(9.81)

    def test_nanosecond_precision_survives(self, tmp_path):
        # 20 minutes at 5 ms from a unix-epoch-scale base timestamp: the
        # normalized float seconds must stay within 1 microsecond
        mav = write_asl_sequence(tmp_path, n_imu=2)
        base = 1_400_000_000_000_000_000
        with open(mav / "imu0" / "data.csv", "w") as fh:
            fh.write("#header\n")
            for i in range(0, 240_000, 1000):
                fh.write(f"{base + i * 5_000_000 + 1},0,0,0,0,0,9.81\n")
        manifest = adapt_asl(str(tmp_path), "fixture")
        imu = load_imu_series(manifest.sequences[0])
        expected = np.arange(0, 240_000, 1000) * 5e-3
        assert np.abs((imu.t - imu.t[0]) - expected).max() < 1e-6


class TestManifestIO:
    def test_roundtrip_identity(self, tmp_path):
        make_demo_dataset.build_asl(str(tmp_path / "ds"), n_sequences=1, n_frames=4, n_imu=10, seed=2)
        manifest = adapt_asl(str(tmp_path / "ds"), "euroc")
        path = str(tmp_path / "m.json")
        save_manifest(manifest, path)
        assert load_manifest(path) == manifest

    def test_dict_roundtrip(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "fixture")
        assert manifest_from_dict(manifest_to_dict(manifest)) == manifest

    def test_builtin_limits_attached(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "euroc")
        assert manifest.sensor_limits is not None
        assert manifest.sensor_limits.gyro_limit == 1000.0

    def test_unknown_version_rejected(self, tmp_path):
        write_asl_sequence(tmp_path)
        doc = manifest_to_dict(adapt_asl(str(tmp_path), "fixture"))
        doc["format_version"] = 99
        with pytest.raises(AdaptError, match="format_version"):
            manifest_from_dict(doc)


class TestValidation:
    def test_valid_fixture(self, tmp_path):
        write_asl_sequence(tmp_path)
        assert validate_manifest(adapt_asl(str(tmp_path), "fixture")) == []

    def test_missing_file_finding(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "fixture")
        os.remove(manifest.sequences[0].cameras["cam_left"].files[0])
        findings = validate_manifest(manifest)
        assert any("missing file" in f.message for f in findings)

    def test_non_monotonic_finding(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "fixture")
        manifest.sequences[0].cameras["cam_left"].timestamps[2] = -1.0
        findings = validate_manifest(manifest)
        assert any("non-monotonic" in f.message for f in findings)

    def test_count_mismatch_finding(self, tmp_path):
        write_asl_sequence(tmp_path)
        manifest = adapt_asl(str(tmp_path), "fixture")
        manifest.sequences[0].cameras["cam_left"].timestamps.append(99.0)
        findings = validate_manifest(manifest)
        assert any("count mismatch" in f.message for f in findings)
