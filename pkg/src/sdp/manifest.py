"""Dataset adaptors: turn KITTI-odometry and ASL directory trees into a manifest.

The manifest is the single hand-off between dataset layouts and the engines:
a JSON file naming every sequence, its camera frame lists with normalized
timestamps, and its IMU CSV. Timestamps are serialized as decimal seconds
strings with 9 fractional digits, which round-trips the float64 values
bit-exactly for sub-nanosecond-free sources (KITTI seconds text, ASL integer
nanoseconds). Adaptation never decodes pixels, so adapting a multi-GB
dataset stays cheap.

Third parties can hand-write manifests for new datasets; the schema is
documented in the README (format_version 1).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import SensorKind, SensorLimits

FORMAT_VERSION = 1

DEG_PER_RAD = 180.0 / math.pi

# Built-in rail limits (m/s^2, deg/s) keyed by dataset name; these are
# datasheet maxima and only feed dynamic-range metrics. Override per run when
# the recording used a narrower device configuration.
BUILTIN_SENSOR_LIMITS = {
    "euroc": SensorLimits(accel_limit=18 * 9.80665, gyro_limit=1000.0),
    "tumvi": SensorLimits(accel_limit=16 * 9.80665, gyro_limit=2000.0),
}


class AdaptError(Exception):
    """Raised when a dataset tree cannot be adapted into a manifest."""


@dataclass
class CameraStream:
    timestamps: list[float]
    files: list[str]

    def count(self) -> int:
        return len(self.timestamps)


@dataclass
class ImuStream:
    csv: str
    gyro_unit: str  # unit in the CSV file: "rad/s" or "deg/s"
    count: int


@dataclass
class SequenceEntry:
    name: str
    epoch_raw: str  # first timestamp of the earliest stream, source units
    time_unit: str  # "ns" or "s"
    cameras: dict[str, CameraStream] = field(default_factory=dict)
    imu: ImuStream | None = None

    def camera(self, kind: SensorKind) -> CameraStream | None:
        return self.cameras.get(kind.value)


@dataclass
class DatasetManifest:
    dataset_name: str
    sequences: list[SequenceEntry]
    sensor_limits: SensorLimits | None = None
    format_version: int = FORMAT_VERSION


def _fmt_ts(seconds: float) -> str:
    return f"{seconds:.9f}"


def _normalize_ns(ts_ns: np.ndarray, epoch_ns: int) -> np.ndarray:
    # subtract in integer nanoseconds before the float conversion so
    # microsecond precision survives decade-scale unix epochs
    return (ts_ns - epoch_ns) / 1e9


def adapt_kitti(root: str, dataset_name: str = "kitti") -> DatasetManifest:
    """Adapt a KITTI odometry tree: sequences/<NN>/{image_0,image_1,times.txt}.

    image_0 maps to the left camera and image_1 to the right; times.txt holds
    one timestamp in seconds per frame. KITTI odometry ships no IMU stream.
    """
    seq_root = os.path.join(root, "sequences")
    if not os.path.isdir(seq_root):
        raise AdaptError(f"no sequences/ directory under {root}")
    entries = []
    for name in sorted(os.listdir(seq_root)):
        seq_dir = os.path.join(seq_root, name)
        if not os.path.isdir(seq_dir):
            continue
        times_path = os.path.join(seq_dir, "times.txt")
        if not os.path.isfile(times_path):
            raise AdaptError(f"sequence {name}: missing times.txt")
        with open(times_path, "r", encoding="utf-8") as fh:
            raw = [line.strip() for line in fh if line.strip()]
        timestamps = [float(v) for v in raw]
        epoch = timestamps[0] if timestamps else 0.0
        normalized = [t - epoch for t in timestamps]
        cameras = {}
        for cam_dir, kind in (("image_0", SensorKind.CAM_LEFT), ("image_1", SensorKind.CAM_RIGHT)):
            image_root = os.path.join(seq_dir, cam_dir)
            if not os.path.isdir(image_root):
                if kind is SensorKind.CAM_LEFT:
                    raise AdaptError(f"sequence {name}: missing {cam_dir}")
                continue
            files = sorted(
                os.path.join(image_root, f)
                for f in os.listdir(image_root)
                if f.lower().endswith((".png", ".jpg", ".jpeg", ".pgm"))
            )
            if len(files) != len(normalized):
                raise AdaptError(
                    f"sequence {name}: count mismatch, {len(normalized)} timestamps "
                    f"vs {len(files)} images in {cam_dir}"
                )
            cameras[kind.value] = CameraStream(list(normalized), files)
        entries.append(
            SequenceEntry(name=name, epoch_raw=raw[0] if raw else "0", time_unit="s", cameras=cameras)
        )
    if not entries:
        raise AdaptError(f"no sequences found under {seq_root}")
    return DatasetManifest(dataset_name=dataset_name, sequences=entries)


def _read_asl_cam_csv(path: str) -> tuple[list[int], list[str]]:
    ts, files = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 2:
                raise AdaptError(f"{path}:{lineno}: malformed row (expected timestamp,filename)")
            try:
                ts.append(int(parts[0]))
            except ValueError as exc:
                raise AdaptError(f"{path}:{lineno}: malformed row ({exc})") from exc
            files.append(parts[1])
    return ts, files


def _scan_asl_imu_csv(path: str) -> tuple[int, int]:
    """Validate an ASL imu CSV and return (row count, first timestamp ns)."""
    count, first = 0, None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise AdaptError(f"{path}:{lineno}: malformed row (expected 7 columns, got {len(parts)})")
            try:
                ts = int(parts[0])
                for p in parts[1:]:
                    float(p)
            except ValueError as exc:
                raise AdaptError(f"{path}:{lineno}: malformed row ({exc})") from exc
            if first is None:
                first = ts
            count += 1
    if count == 0:
        raise AdaptError(f"{path}: empty IMU CSV")
    return count, first


def adapt_asl(root: str, dataset_name: str) -> DatasetManifest:
    """Adapt an ASL-layout tree (EuroC, TUM-VI): <seq>/mav0/{cam0,cam1,imu0}.

    Camera and IMU timestamps are integer nanoseconds; they are normalized to
    seconds from the sequence epoch (the earliest first-timestamp across
    streams). The IMU CSV itself is referenced, not copied; its gyro unit is
    recorded so the loader converts rad/s to the canonical deg/s.
    """
    if not os.path.isdir(root):
        raise AdaptError(f"no such directory: {root}")
    entries = []
    for name in sorted(os.listdir(root)):
        mav_dir = os.path.join(root, name, "mav0")
        if not os.path.isdir(mav_dir):
            continue
        cam0_csv = os.path.join(mav_dir, "cam0", "data.csv")
        if not os.path.isfile(cam0_csv):
            raise AdaptError(f"sequence {name}: missing cam0/data.csv")
        cam_raw = {}
        for cam_name, kind in (("cam0", SensorKind.CAM_LEFT), ("cam1", SensorKind.CAM_RIGHT)):
            csv_path = os.path.join(mav_dir, cam_name, "data.csv")
            if not os.path.isfile(csv_path):
                continue
            ts_ns, files = _read_asl_cam_csv(csv_path)
            data_dir = os.path.join(mav_dir, cam_name, "data")
            cam_raw[kind.value] = (np.array(ts_ns, dtype=np.int64), [os.path.join(data_dir, f) for f in files])
        imu_csv = os.path.join(mav_dir, "imu0", "data.csv")
        imu = None
        imu_first = None
        if os.path.isfile(imu_csv):
            imu_count, imu_first = _scan_asl_imu_csv(imu_csv)
            imu = ImuStream(csv=imu_csv, gyro_unit="rad/s", count=imu_count)
        firsts = [int(ts[0]) for ts, _ in cam_raw.values() if len(ts)]
        if imu_first is not None:
            firsts.append(imu_first)
        if not firsts:
            raise AdaptError(f"sequence {name}: no samples in any stream")
        epoch_ns = min(firsts)
        cameras = {
            key: CameraStream(list(_normalize_ns(ts, epoch_ns)), files)
            for key, (ts, files) in cam_raw.items()
        }
        entries.append(
            SequenceEntry(
                name=name,
                epoch_raw=str(epoch_ns),
                time_unit="ns",
                cameras=cameras,
                imu=imu,
            )
        )
    if not entries:
        raise AdaptError(f"no ASL sequences (mav0 trees) found under {root}")
    limits = BUILTIN_SENSOR_LIMITS.get(dataset_name.lower())
    return DatasetManifest(dataset_name=dataset_name, sequences=entries, sensor_limits=limits)


def load_imu_series(entry: SequenceEntry):
    """Load and normalize the IMU CSV referenced by a sequence entry.

    Returns an ImuSeries with timestamps in seconds from the sequence epoch,
    accel in m/s^2, gyro converted to deg/s.
    """
    from .core import ImuSeries

    if entry.imu is None:
        return None
    rows = np.loadtxt(entry.imu.csv, delimiter=",", comments="#", dtype=np.float64, ndmin=2)
    ts_ns = np.loadtxt(entry.imu.csv, delimiter=",", comments="#", usecols=0, dtype=np.int64, ndmin=1)
    if entry.time_unit == "ns":
        t = _normalize_ns(ts_ns, int(entry.epoch_raw))
    else:
        t = rows[:, 0] - float(entry.epoch_raw)
    gyro = rows[:, 1:4]
    accel = rows[:, 4:7]
    if entry.imu.gyro_unit == "rad/s":
        gyro = gyro * DEG_PER_RAD
    return ImuSeries(t=t, accel=accel, gyro=gyro)


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    seqs = []
    for e in manifest.sequences:
        streams = {}
        for key, cam in e.cameras.items():
            streams[key] = {"timestamps": [_fmt_ts(t) for t in cam.timestamps], "files": cam.files}
        if e.imu is not None:
            streams["imu"] = {"csv": e.imu.csv, "gyro_unit": e.imu.gyro_unit, "count": e.imu.count}
        seqs.append(
            {"name": e.name, "epoch": {"raw": e.epoch_raw, "unit": e.time_unit}, "streams": streams}
        )
    doc = {
        "dataset_name": manifest.dataset_name,
        "format_version": manifest.format_version,
        "sequences": seqs,
    }
    if manifest.sensor_limits is not None:
        doc["sensor_limits"] = {
            "accel": manifest.sensor_limits.accel_limit,
            "gyro": manifest.sensor_limits.gyro_limit,
        }
    return doc


def manifest_from_dict(doc: dict) -> DatasetManifest:
    if doc.get("format_version") != FORMAT_VERSION:
        raise AdaptError(f"unsupported manifest format_version: {doc.get('format_version')}")
    limits = None
    if "sensor_limits" in doc:
        limits = SensorLimits(
            accel_limit=float(doc["sensor_limits"]["accel"]),
            gyro_limit=float(doc["sensor_limits"]["gyro"]),
        )
    sequences = []
    for s in doc["sequences"]:
        cameras = {}
        imu = None
        for key, stream in s["streams"].items():
            if key == "imu":
                imu = ImuStream(csv=stream["csv"], gyro_unit=stream["gyro_unit"], count=int(stream["count"]))
            else:
                cameras[key] = CameraStream(
                    [float(t) for t in stream["timestamps"]], list(stream["files"])
                )
        sequences.append(
            SequenceEntry(
                name=s["name"],
                epoch_raw=str(s["epoch"]["raw"]),
                time_unit=s["epoch"]["unit"],
                cameras=cameras,
                imu=imu,
            )
        )
    return DatasetManifest(dataset_name=doc["dataset_name"], sequences=sequences, sensor_limits=limits)


def save_manifest(manifest: DatasetManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest_to_dict(manifest), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_manifest(path: str) -> DatasetManifest:
    with open(path, "r", encoding="utf-8") as fh:
        return manifest_from_dict(json.load(fh))


@dataclass(frozen=True)
class Finding:
    sequence: str
    stream: str
    message: str

    def __str__(self):
        return f"{self.sequence}/{self.stream}: {self.message}"


def validate_manifest(manifest: DatasetManifest) -> list[Finding]:
    """Structural findings: missing files, non-monotonic timestamps, mismatches."""
    findings = []
    seen = set()
    for entry in manifest.sequences:
        if entry.name in seen:
            findings.append(Finding(entry.name, "-", "duplicate sequence name"))
        seen.add(entry.name)
        if not entry.cameras:
            findings.append(Finding(entry.name, "-", "no camera stream"))
        for key, cam in entry.cameras.items():
            if len(cam.files) != len(cam.timestamps):
                findings.append(
                    Finding(entry.name, key, f"count mismatch: {len(cam.timestamps)} timestamps vs {len(cam.files)} files")
                )
            ts = np.asarray(cam.timestamps)
            if ts.size and np.any(np.diff(ts) < 0):
                findings.append(Finding(entry.name, key, "non-monotonic timestamps"))
            for f in cam.files:
                if not os.path.isfile(f):
                    findings.append(Finding(entry.name, key, f"missing file: {f}"))
        if entry.imu is not None and not os.path.isfile(entry.imu.csv):
            findings.append(Finding(entry.name, "imu", f"missing file: {entry.imu.csv}"))
    return findings
