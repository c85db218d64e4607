"""Sequence loading, the processing-element pass, and the scoreboard store.

The unit of parallelism is the sequence: a worker streams a sequence's
frames exactly once, converting each image to luma and dispatching it to
every frame-consuming element, so decoding (the dominant cost) is never
repeated. Element failures are confined to their (sequence, element) cell;
the run continues and the cell records the error.

The scoreboard persists as a directory: ``scoreboard.json`` holds the cell
index plus provenance, and each cell's records live in
``<sequence>/<element>.csv`` with header ``metric_id,level,unit,key,value``.
All output ordering is keyed by names, never completion order, so reruns at
any thread count are byte-identical.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import __version__, general_metrics, inertial_metrics, visual_metrics
from .config import RunConfig, config_hash
from .core import (
    Applicability,
    CharacterizationLevel,
    Frame,
    ImuSeries,
    MetricRecord,
    SensorKind,
)
from .features import detect_fast, detect_orb_style, spatial_distribution
from .image_ops import luma
from .manifest import DatasetManifest, SequenceEntry, load_imu_series
from .similarity import (
    SimilarityReport,
    Vocabulary,
    bow_vector,
    brief_pattern,
    build_vocabulary,
    closest_match,
    describe,
    fit_idf,
    load_vocabulary,
)
from .stereo import StereoConfig, disparity_bm, disparity_sgm, disparity_stats

log = logging.getLogger("sdp")

SAMPLE = CharacterizationLevel.SAMPLE
SEQUENCE = CharacterizationLevel.SEQUENCE


class DecodeError(Exception):
    """An image file could not be decoded."""


def decode_image(path: str) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode in ("L", "RGB"):
                return np.asarray(img)
            if img.mode in ("I;16", "I"):
                arr = np.asarray(img).astype(np.float64)
                peak = arr.max()
                scale = 255.0 / peak if peak > 255 else 1.0
                return np.clip(arr * scale, 0, 255).astype(np.uint8)
            return np.asarray(img.convert("RGB"))
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def frames(entry: SequenceEntry, kind: SensorKind):
    """Yield decoded frames of one camera stream lazily, in manifest order."""
    cam = entry.camera(kind)
    if cam is None:
        raise ValueError(f"sequence {entry.name} has no {kind.value} stream")
    for index, (t, path) in enumerate(zip(cam.timestamps, cam.files)):
        yield Frame(t=t, index=index, image=decode_image(path))


class SequenceContext:
    """Lazy per-sequence data access shared by the elements of one pass."""

    def __init__(self, entry: SequenceEntry, dataset_name: str):
        self.entry = entry
        self.dataset_name = dataset_name
        self._imu: ImuSeries | None = None
        self._imu_loaded = False
        self.vocabulary: Vocabulary | None = None
        self.sensor_limits = None

    def camera_timestamps(self, kind: SensorKind) -> np.ndarray | None:
        cam = self.entry.camera(kind)
        if cam is None:
            return None
        return np.asarray(cam.timestamps, dtype=np.float64)

    def imu(self) -> ImuSeries | None:
        if not self._imu_loaded:
            self._imu = load_imu_series(self.entry)
            self._imu_loaded = True
        return self._imu


class BulkElement:
    """Element computed from timestamps/IMU arrays without decoding frames."""

    id: str = ""
    required: frozenset[SensorKind] = frozenset()
    levels: frozenset[CharacterizationLevel] = frozenset({SAMPLE, SEQUENCE})

    def run(self, ctx: SequenceContext, cfg: RunConfig) -> list[MetricRecord]:
        raise NotImplementedError


class FramePassElement:
    """Element fed one decoded (and luma-converted) frame at a time."""

    id: str = ""
    required: frozenset[SensorKind] = frozenset({SensorKind.CAM_LEFT})
    levels: frozenset[CharacterizationLevel] = frozenset({SAMPLE, SEQUENCE})
    needs_pair = False

    def begin(self, ctx: SequenceContext, cfg: RunConfig) -> None:
        pass

    def on_frame(self, frame: Frame, gray: np.ndarray) -> None:
        pass

    def on_pair(self, index: int, left_gray: np.ndarray, right_gray: np.ndarray) -> None:
        pass

    def finish(self) -> list[MetricRecord]:
        return []


class GeneralElement(BulkElement):
    id = "general"
    required = frozenset()

    def run(self, ctx, cfg):
        records = []
        streams: dict[str, np.ndarray | None] = {
            SensorKind.CAM_LEFT.value: ctx.camera_timestamps(SensorKind.CAM_LEFT),
            SensorKind.CAM_RIGHT.value: ctx.camera_timestamps(SensorKind.CAM_RIGHT),
        }
        imu = ctx.imu()
        streams["imu"] = imu.t if imu is not None else None
        for name, ts in streams.items():
            if ts is None:
                for metric, level, unit in (
                    (f"samples.{name}", SEQUENCE, "samples"),
                    (f"duration.{name}", SEQUENCE, "s"),
                    (f"sample_time.{name}", SEQUENCE, "s"),
                    (f"sample_dt.{name}", SAMPLE, "s"),
                ):
                    records.append(MetricRecord.absent(metric, level, unit))
                continue
            records.append(MetricRecord.sequence_value(f"samples.{name}", "samples", float(ts.size)))
            duration = general_metrics.total_duration(ts)
            if duration is None:
                records.append(MetricRecord.absent(f"duration.{name}", SEQUENCE, "s"))
                records.append(MetricRecord.absent(f"sample_time.{name}", SEQUENCE, "s"))
                records.append(MetricRecord.absent(f"sample_dt.{name}", SAMPLE, "s"))
            else:
                records.append(MetricRecord.sequence_value(f"duration.{name}", "s", duration))
                records.append(
                    MetricRecord.sequence_value(
                        f"sample_time.{name}", "s", general_metrics.mean_sample_time(ts)
                    )
                )
                records.append(
                    MetricRecord.sample_series(
                        f"sample_dt.{name}", "s", general_metrics.sample_intervals(ts)
                    )
                )
        left = streams[SensorKind.CAM_LEFT.value]
        right = streams[SensorKind.CAM_RIGHT.value]
        imu_ts = streams["imu"]
        for metric, cam_ts in (("ts_mismatch.vi", left), ("ts_mismatch.vi_right", right)):
            if cam_ts is None or imu_ts is None or imu_ts.size == 0 or cam_ts.size == 0:
                records.append(MetricRecord.absent(metric, SAMPLE, "s"))
            else:
                records.append(
                    MetricRecord.sample_series(
                        metric, "s", general_metrics.timestamp_mismatch(cam_ts, imu_ts)
                    )
                )
        return records


_AXES = ("x", "y", "z")


class InertialElement(BulkElement):
    id = "inertial"
    required = frozenset({SensorKind.IMU})

    def run(self, ctx, cfg):
        imu = ctx.imu()
        records = []
        for i, axis in enumerate(_AXES):
            records.append(MetricRecord.sample_series(f"accel.{axis}", "m/s^2", imu.accel[:, i]))
            records.append(MetricRecord.sample_series(f"gyro.{axis}", "deg/s", imu.gyro[:, i]))
        derivs = inertial_metrics.derivatives(imu)
        groups = (
            ("jerk", "m/s^3", derivs.jerk if derivs else None),
            ("snap", "m/s^4", derivs.snap if derivs else None),
            ("alpha", "deg/s^2", derivs.alpha if derivs else None),
            ("phi", "deg/s^3", derivs.phi if derivs else None),
        )
        for name, unit, data in groups:
            for i, axis in enumerate(_AXES):
                if data is None or data.shape[0] == 0:
                    records.append(MetricRecord.absent(f"{name}.{axis}", SAMPLE, unit))
                else:
                    records.append(MetricRecord.sample_series(f"{name}.{axis}", unit, data[:, i]))
        rot = inertial_metrics.rotation_only(
            imu, gravity=cfg.inertial_gravity, band_ratio=cfg.inertial_rotation_band
        )
        records.append(MetricRecord.sample_series("accel_magnitude", "m/s^2", rot.magnitude))
        records.append(MetricRecord.sequence_value("rotation_only_pct", "%", rot.percentage))
        limits = ctx.sensor_limits
        channels = [(f"a{axis}", imu.accel[:, i]) for i, axis in enumerate(_AXES)]
        channels += [(f"g{axis}", imu.gyro[:, i]) for i, axis in enumerate(_AXES)]
        for name, series in channels:
            limit = None
            if limits is not None:
                limit = limits.accel_limit if name.startswith("a") else limits.gyro_limit
            if limit is None:
                records.append(MetricRecord.absent(f"dr_coverage.{name}", SEQUENCE, "%"))
                records.append(MetricRecord.absent(f"dr_crossing.{name}", SEQUENCE, "%"))
            else:
                records.append(
                    MetricRecord.sequence_value(
                        f"dr_coverage.{name}", "%", inertial_metrics.dr_coverage(series, limit)
                    )
                )
                records.append(
                    MetricRecord.sequence_value(
                        f"dr_crossing.{name}",
                        "%",
                        inertial_metrics.dr_crossing(series, limit, cfg.inertial_crossing_ratio),
                    )
                )
        return records


class BrightnessElement(FramePassElement):
    id = "brightness"

    def begin(self, ctx, cfg):
        self.values = []
        self.times = []

    def on_frame(self, frame, gray):
        self.values.append(float(gray.mean()))
        self.times.append(frame.t)

    def finish(self):
        records = [MetricRecord.sample_series("brightness", "DL", self.values)]
        if len(self.values) < 2:
            records.append(MetricRecord.absent("brightness_deriv", SAMPLE, "DL/s"))
            for k in (1, 2, 3):
                records.append(MetricRecord.absent(f"brightness_deriv_ratio.{k}s", SEQUENCE, "%"))
            return records
        series = visual_metrics.brightness_series(np.array(self.values), np.array(self.times))
        records.append(MetricRecord.sample_series("brightness_deriv", "DL/s", series.derivative))
        for k in (1, 2, 3):
            records.append(
                MetricRecord.sequence_value(f"brightness_deriv_ratio.{k}s", "%", series.exceed_pct[k])
            )
        return records


class ExposureElement(FramePassElement):
    id = "exposure"

    def begin(self, ctx, cfg):
        self.alpha = cfg.image_trim_alpha
        self.n_zones = cfg.visual_exposure_zones
        self.means = []
        self.skews = []
        self.zones = []
        self.classes = []

    def on_frame(self, frame, gray):
        zone, cls, mean, skew = visual_metrics.classify_exposure(gray, self.alpha, self.n_zones)
        self.zones.append(float(zone))
        self.classes.append(cls)
        self.means.append(mean)
        self.skews.append((frame.index, skew))

    def finish(self):
        records = [
            MetricRecord.sample_series("exposure.mean", "DL", self.means),
            MetricRecord.sample_series("exposure.zone", "DL", self.zones),
        ]
        skew_pairs = [(str(i), s) for i, s in self.skews if s is not None]
        records.append(MetricRecord("exposure.skewness", SAMPLE, "DL", skew_pairs))
        n = len(self.classes)
        for cls in visual_metrics.ExposureClass:
            pct = 100.0 * sum(1 for c in self.classes if c is cls) / n if n else 0.0
            records.append(MetricRecord.sequence_value(f"exposure.class_pct.{cls.value}", "%", pct))
        return records


class ContrastElement(FramePassElement):
    id = "contrast"

    def begin(self, ctx, cfg):
        self.alpha = cfg.image_trim_alpha
        self.use_lab = cfg.visual_contrast_lab
        self.cr = []
        self.weber = []
        self.michelson = []
        self.rms = []

    def on_frame(self, frame, gray):
        report = visual_metrics.contrast(gray, self.alpha, use_lab=self.use_lab)
        if report.cr is not None:
            self.cr.append((str(frame.index), report.cr))
            self.weber.append((str(frame.index), report.weber))
        self.michelson.append(report.michelson)
        self.rms.append(report.rms)

    def finish(self):
        return [
            MetricRecord("contrast.cr", SAMPLE, "DL", self.cr),
            MetricRecord("contrast.weber", SAMPLE, "DL", self.weber),
            MetricRecord.sample_series("contrast.michelson", "DL", self.michelson),
            MetricRecord.sample_series("contrast.rms", "DL", self.rms),
        ]


class BlurElement(FramePassElement):
    id = "blur"

    def begin(self, ctx, cfg):
        self.tile_dim = cfg.image_blur_tile
        self.threshold = cfg.visual_blur_threshold
        self.scores = []
        self.tile_pcts = []

    def on_frame(self, frame, gray):
        report = visual_metrics.blur_report(gray, self.tile_dim, self.threshold)
        self.scores.append(report.score)
        self.tile_pcts.append(report.blurred_tile_pct)

    def finish(self):
        records = [
            MetricRecord.sample_series("blur.score", "DL", self.scores),
            MetricRecord.sample_series("blur.tile_pct", "%", self.tile_pcts),
        ]
        ratios = visual_metrics.blurred_image_ratios(np.array(self.tile_pcts))
        for cut, suffix in ((0.0, "gt0"), (50.0, "gt50"), (90.0, "gt90")):
            records.append(
                MetricRecord.sequence_value(f"blur.images_{suffix}_pct", "%", ratios[cut])
            )
        return records


class FeatureElement(FramePassElement):
    detector = "fast"

    def __init__(self):
        self.id = f"features_{self.detector}"

    def begin(self, ctx, cfg):
        self.cfg = cfg
        self.counts = []
        self.avgs = []
        self.dist_avg = []
        self.dist_abs = []

    def detect(self, gray):
        return detect_fast(
            gray,
            self.cfg.features_fast_threshold,
            arc=self.cfg.features_fast_arc,
            nonmax=self.cfg.features_nonmax,
        )

    def on_frame(self, frame, gray):
        kps = self.detect(gray)
        dist = spatial_distribution(kps, gray.shape, self.cfg.feature_bin(), self.detector)
        self.counts.append(float(dist.total))
        self.avgs.append(dist.avg_per_bin)
        self.dist_avg.append(dist.dist_avg_pct)
        self.dist_abs.append(dist.dist_abs_pct)

    def finish(self):
        d = self.detector
        return [
            MetricRecord.sample_series(f"features.count.{d}", "features", self.counts),
            MetricRecord.sample_series(f"features.avg_per_bin.{d}", "features", self.avgs),
            MetricRecord.sample_series(f"features.dist_avg.{d}", "%", self.dist_avg),
            MetricRecord.sample_series(f"features.dist_abs.{d}", "%", self.dist_abs),
        ]


class FastFeatureElement(FeatureElement):
    detector = "fast"


class OrbFeatureElement(FeatureElement):
    detector = "orb"

    def detect(self, gray):
        return detect_orb_style(
            gray,
            self.cfg.features_fast_threshold,
            arc=self.cfg.features_fast_arc,
            nonmax=self.cfg.features_nonmax,
            max_keypoints=self.cfg.features_max_keypoints,
        )


class StereoElement(FramePassElement):
    method = "bm"
    required = frozenset({SensorKind.CAM_LEFT, SensorKind.CAM_RIGHT})
    needs_pair = True

    def __init__(self):
        self.id = f"stereo_{self.method}"

    def begin(self, ctx, cfg):
        p1, p2 = cfg.stereo_penalties()
        self.stereo_cfg = StereoConfig(
            d_max=cfg.stereo_d_max,
            block=cfg.stereo_block,
            paths=cfg.stereo_paths,
            p1=p1,
            p2=p2,
            uniqueness_pct=cfg.stereo_uniqueness,
            lr_check=cfg.stereo_lr_check,
        )
        self.mean = []
        self.std = []
        self.valid_pct = []

    def compute(self, left, right):
        return disparity_bm(left, right, self.stereo_cfg)

    def on_pair(self, index, left_gray, right_gray):
        disp = self.compute(left_gray, right_gray)
        stats = disparity_stats(disp)
        self.valid_pct.append((str(index), 100.0 * disp.valid_fraction))
        if stats is not None:
            self.mean.append((str(index), stats[0]))
            self.std.append((str(index), stats[1]))

    def finish(self):
        m = self.method
        return [
            MetricRecord(f"disparity.mean.{m}", SAMPLE, "DL", self.mean),
            MetricRecord(f"disparity.std.{m}", SAMPLE, "DL", self.std),
            MetricRecord(f"disparity.valid_pct.{m}", SAMPLE, "%", self.valid_pct),
        ]


class StereoBmElement(StereoElement):
    method = "bm"


class StereoSgmElement(StereoElement):
    method = "sgm"

    def compute(self, left, right):
        return disparity_sgm(left, right, self.stereo_cfg)


class SimilarityElement(FramePassElement):
    id = "similarity"

    def begin(self, ctx, cfg):
        if ctx.vocabulary is None:
            raise RuntimeError("similarity element needs a vocabulary")
        self.cfg = cfg
        self.vocab = ctx.vocabulary
        self.pattern = brief_pattern(cfg.similarity_seed)
        self.vectors = []

    def on_frame(self, frame, gray):
        kps = detect_orb_style(
            gray,
            self.cfg.features_fast_threshold,
            arc=self.cfg.features_fast_arc,
            max_keypoints=self.cfg.similarity_max_descriptors,
        )
        descriptors = describe(gray, kps, self.pattern)
        self.vectors.append(bow_vector(self.vocab, descriptors))

    def finish(self):
        if len(self.vectors) < self.cfg.similarity_min_gap + 1:
            return [
                MetricRecord.absent("similarity.score", SAMPLE, "DL"),
                MetricRecord.absent("similarity.dist", SAMPLE, "frames"),
            ]
        report = closest_match(self.vectors, self.cfg.similarity_min_gap)
        keys = [str(i) for i in report.frame_indices]
        records = [
            MetricRecord.sample_series("similarity.score", "DL", report.scores, keys=keys),
            MetricRecord.sample_series("similarity.dist", "frames", report.distances, keys=keys),
        ]
        for threshold in SimilarityReport.SCORE_THRESHOLDS:
            records.append(
                MetricRecord.sequence_value(
                    f"similarity.count_ge_{int(round(threshold * 100))}",
                    "matches",
                    float(report.counts[threshold]),
                )
            )
        records.append(
            MetricRecord.sequence_value(
                "similarity.loop_opportunity_pct", "%", report.loop_opportunity_pct
            )
        )
        return records


ELEMENT_TYPES: dict[str, type] = {
    cls().id: cls
    for cls in (
        GeneralElement,
        InertialElement,
        BrightnessElement,
        ExposureElement,
        ContrastElement,
        BlurElement,
        FastFeatureElement,
        OrbFeatureElement,
        StereoBmElement,
        StereoSgmElement,
        SimilarityElement,
    )
}

ALL_ELEMENT_IDS = tuple(sorted(ELEMENT_TYPES))


@dataclass
class Cell:
    status: str  # "ok" | "absent" | "failed"
    error: str = ""
    records: list[MetricRecord] = field(default_factory=list)


@dataclass
class Scoreboard:
    dataset_name: str
    sequences: list[str]
    element_ids: list[str]
    cells: dict[tuple[str, str], Cell]
    provenance: dict


def _run_sequence(
    entry: SequenceEntry,
    dataset_name: str,
    element_ids: list[str],
    cfg: RunConfig,
    vocabulary: Vocabulary | None,
    sensor_limits,
) -> dict[tuple[str, str], Cell]:
    ctx = SequenceContext(entry, dataset_name)
    ctx.vocabulary = vocabulary
    ctx.sensor_limits = sensor_limits
    cells: dict[tuple[str, str], Cell] = {}
    frame_elements: list[FramePassElement] = []
    for element_id in element_ids:
        element = ELEMENT_TYPES[element_id]()
        key = (entry.name, element_id)
        try:
            missing = [
                kind
                for kind in element.required
                if (kind is SensorKind.IMU and ctx.imu() is None)
                or (kind is not SensorKind.IMU and ctx.entry.camera(kind) is None)
            ]
        except Exception as exc:  # noqa: BLE001 - unreadable stream data
            cells[key] = Cell(status="failed", error=f"{type(exc).__name__}: {exc}")
            log.warning("%s/%s: failed: %s", entry.name, element_id, exc)
            continue
        if missing:
            cells[key] = Cell(status="absent")
            log.info("%s/%s: absent (missing %s)", entry.name, element_id, [m.value for m in missing])
            continue
        if isinstance(element, BulkElement):
            try:
                cells[key] = Cell(status="ok", records=element.run(ctx, cfg))
                log.info("%s/%s: ok", entry.name, element_id)
            except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                cells[key] = Cell(status="failed", error=f"{type(exc).__name__}: {exc}")
                log.warning("%s/%s: failed: %s", entry.name, element_id, exc)
        else:
            frame_elements.append(element)

    if frame_elements:
        active: dict[str, FramePassElement] = {}
        for element in frame_elements:
            key = (entry.name, element.id)
            try:
                element.begin(ctx, cfg)
                active[element.id] = element
            except Exception as exc:  # noqa: BLE001
                cells[key] = Cell(status="failed", error=f"{type(exc).__name__}: {exc}")
                log.warning("%s/%s: failed: %s", entry.name, element.id, exc)
        need_pair = any(e.needs_pair for e in active.values())
        right_cam = entry.camera(SensorKind.CAM_RIGHT)
        right_iter = frames(entry, SensorKind.CAM_RIGHT) if (need_pair and right_cam) else None
        for frame in frames(entry, SensorKind.CAM_LEFT):
            gray = luma(frame.image)
            right_gray = None
            if right_iter is not None:
                # streams may differ in length (dropped frames); pairs stop
                # at the shorter one
                right_frame = next(right_iter, None)
                if right_frame is None:
                    right_iter = None
                else:
                    right_gray = luma(right_frame.image)
            for element_id in list(active):
                element = active[element_id]
                try:
                    element.on_frame(frame, gray)
                    if element.needs_pair and right_gray is not None:
                        element.on_pair(frame.index, gray, right_gray)
                except Exception as exc:  # noqa: BLE001
                    cells[(entry.name, element_id)] = Cell(
                        status="failed", error=f"{type(exc).__name__}: {exc}"
                    )
                    log.warning("%s/%s: failed: %s", entry.name, element_id, exc)
                    del active[element_id]
        for element_id, element in active.items():
            key = (entry.name, element_id)
            try:
                cells[key] = Cell(status="ok", records=element.finish())
                log.info("%s/%s: ok", entry.name, element_id)
            except Exception as exc:  # noqa: BLE001
                cells[key] = Cell(status="failed", error=f"{type(exc).__name__}: {exc}")
                log.warning("%s/%s: failed: %s", entry.name, element_id, exc)
    return cells


def _train_vocabulary(manifest: DatasetManifest, cfg: RunConfig) -> Vocabulary:
    """Build the default vocabulary from a deterministic corpus subsample."""
    pattern = brief_pattern(cfg.similarity_seed)
    per_image: list[np.ndarray] = []
    for entry in sorted(manifest.sequences, key=lambda e: e.name):
        cam = entry.camera(SensorKind.CAM_LEFT)
        if cam is None or not cam.files:
            continue
        n = len(cam.files)
        stride = max(1, n // cfg.similarity_vocab_frames_per_seq)
        picked = list(range(0, n, stride))[: cfg.similarity_vocab_frames_per_seq]
        for idx in picked:
            gray = luma(decode_image(cam.files[idx]))
            kps = detect_orb_style(
                gray,
                cfg.features_fast_threshold,
                arc=cfg.features_fast_arc,
                max_keypoints=cfg.similarity_max_descriptors,
            )
            per_image.append(describe(gray, kps, pattern))
    pooled = (
        np.concatenate([d for d in per_image if d.shape[0]], axis=0)
        if any(d.shape[0] for d in per_image)
        else np.zeros((0, 32), dtype=np.uint8)
    )
    if pooled.shape[0] > cfg.similarity_vocab_max_descriptors:
        pooled = pooled[: cfg.similarity_vocab_max_descriptors]
    if pooled.shape[0] < cfg.similarity_k:
        raise RuntimeError(
            "not enough descriptors in the corpus to train a vocabulary; "
            "provide similarity.vocab_path"
        )
    vocab = build_vocabulary(pooled, cfg.similarity_k, cfg.similarity_depth, cfg.similarity_seed)
    fit_idf(vocab, per_image)
    return vocab


def _creation_time() -> str:
    pinned = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = int(pinned) if pinned else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(stamp))


def run_characterization(
    manifest: DatasetManifest,
    element_ids=None,
    cfg: RunConfig | None = None,
    vocabulary: Vocabulary | None = None,
) -> Scoreboard:
    """Run the requested elements over every sequence of a manifest.

    Sequences run in parallel (cfg.threads workers); results merge in
    sequence-name order so the scoreboard is identical at any thread count.
    """
    cfg = cfg or RunConfig()
    element_ids = sorted(element_ids) if element_ids else list(ALL_ELEMENT_IDS)
    unknown = [e for e in element_ids if e not in ELEMENT_TYPES]
    if unknown:
        raise ValueError(f"unknown elements: {unknown}")
    if "similarity" in element_ids and vocabulary is None:
        if cfg.similarity_vocab_path:
            vocabulary = load_vocabulary(cfg.similarity_vocab_path)
        else:
            vocabulary = _train_vocabulary(manifest, cfg)
    entries = sorted(manifest.sequences, key=lambda e: e.name)
    cells: dict[tuple[str, str], Cell] = {}
    if cfg.threads > 1 and len(entries) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = {
                pool.submit(
                    _run_sequence,
                    entry,
                    manifest.dataset_name,
                    element_ids,
                    cfg,
                    vocabulary,
                    manifest.sensor_limits,
                ): entry.name
                for entry in entries
            }
            for future in concurrent.futures.as_completed(futures):
                cells.update(future.result())
    else:
        for entry in entries:
            cells.update(
                _run_sequence(
                    entry, manifest.dataset_name, element_ids, cfg, vocabulary, manifest.sensor_limits
                )
            )
    provenance = {
        "config_hash": config_hash(cfg),
        "tool_version": __version__,
        "created": _creation_time(),
    }
    return Scoreboard(
        dataset_name=manifest.dataset_name,
        sequences=[e.name for e in entries],
        element_ids=element_ids,
        cells=cells,
        provenance=provenance,
    )


def export_scoreboard(board: Scoreboard, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    index = {
        "dataset_name": board.dataset_name,
        "sequences": sorted(board.sequences),
        "elements": sorted(board.element_ids),
        "provenance": board.provenance,
        "cells": [
            {
                "sequence": seq,
                "element": element,
                "status": board.cells[(seq, element)].status,
                "error": board.cells[(seq, element)].error,
            }
            for seq in sorted(board.sequences)
            for element in sorted(board.element_ids)
            if (seq, element) in board.cells
        ],
    }
    with open(os.path.join(out_dir, "scoreboard.json"), "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for (seq, element), cell in sorted(board.cells.items()):
        seq_dir = os.path.join(out_dir, seq)
        os.makedirs(seq_dir, exist_ok=True)
        path = os.path.join(seq_dir, f"{element}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric_id", "level", "unit", "key", "value"])
            for record in sorted(cell.records, key=lambda r: r.metric_id):
                if record.applicability is Applicability.ABSENT:
                    continue
                for key, value in record.values:
                    writer.writerow([record.metric_id, record.level.value, record.unit, key, repr(value)])


def load_scoreboard(path: str) -> Scoreboard:
    with open(os.path.join(path, "scoreboard.json"), "r", encoding="utf-8") as fh:
        index = json.load(fh)
    cells: dict[tuple[str, str], Cell] = {}
    for info in index["cells"]:
        seq, element = info["sequence"], info["element"]
        cell = Cell(status=info["status"], error=info.get("error", ""))
        csv_path = os.path.join(path, seq, f"{element}.csv")
        if os.path.isfile(csv_path):
            grouped: dict[tuple[str, str, str], list[tuple[str, float]]] = {}
            with open(csv_path, "r", encoding="utf-8", newline="") as fh:
                for row in csv.DictReader(fh):
                    grouped.setdefault(
                        (row["metric_id"], row["level"], row["unit"]), []
                    ).append((row["key"], float(row["value"])))
            for (metric_id, level, unit), values in sorted(grouped.items()):
                cell.records.append(
                    MetricRecord(metric_id, CharacterizationLevel(level), unit, values)
                )
        cells[(seq, element)] = cell
    return Scoreboard(
        dataset_name=index["dataset_name"],
        sequences=list(index["sequences"]),
        element_ids=list(index["elements"]),
        cells=cells,
        provenance=index.get("provenance", {}),
    )
