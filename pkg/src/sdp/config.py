"""Run configuration: one flat namespace of dotted keys with typed defaults.

Config files are plain ``key = value`` lines (``#`` comments allowed); CLI
flags override file values. Unknown keys are rejected so typos fail loudly.
The effective configuration is hashed into scoreboard provenance.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields, replace

ENV_CONFIG = "SDP_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    # image primitives
    image_trim_alpha: float = 0.01
    image_blur_tile: int = 64
    image_feature_bin: int = 50
    # inertial
    inertial_gravity: float = 9.80665
    inertial_rotation_band: float = 0.10
    inertial_crossing_ratio: float = 0.01
    # visual
    visual_blur_threshold: float = 100.0
    visual_exposure_zones: int = 7
    visual_contrast_lab: bool = True
    # features
    features_fast_threshold: int = 10
    features_fast_arc: int = 9
    features_nonmax: bool = True
    features_max_keypoints: int = 0  # 0 = unlimited
    features_bin_dim: int = 0  # 0 = inherit image.feature_bin
    # stereo
    stereo_d_max: int = 128
    stereo_block: int = 15
    stereo_paths: int = 8
    stereo_p1: float = 0.0  # 0 = derive 8 * block^2
    stereo_p2: float = 0.0  # 0 = derive 32 * block^2
    stereo_uniqueness: float = 10.0
    stereo_lr_check: bool = True
    # similarity
    similarity_k: int = 10
    similarity_depth: int = 3
    similarity_seed: int = 0
    similarity_min_gap: int = 1
    similarity_vocab_path: str = ""
    similarity_max_descriptors: int = 300
    similarity_vocab_frames_per_seq: int = 20
    similarity_vocab_max_descriptors: int = 20000
    # run control
    threads: int = 1

    def feature_bin(self) -> int:
        return self.features_bin_dim if self.features_bin_dim > 0 else self.image_feature_bin

    def stereo_penalties(self) -> tuple[float, float]:
        w2 = float(self.stereo_block) ** 2
        p1 = self.stereo_p1 if self.stereo_p1 > 0 else 8.0 * w2
        p2 = self.stereo_p2 if self.stereo_p2 > 0 else 32.0 * w2
        return p1, p2

    def validate(self) -> None:
        if self.image_blur_tile < 8 or self.feature_bin() < 8:
            raise ValueError("tile/bin dimensions must be >= 8")
        if not 0 <= self.image_trim_alpha < 0.5:
            raise ValueError("image.trim_alpha must lie in [0, 0.5)")
        if self.visual_exposure_zones < 4:
            raise ValueError("visual.exposure_zones must be >= 4")
        if not 1 <= self.features_fast_threshold <= 254:
            raise ValueError("features.fast_threshold must lie in [1, 254]")
        if not 9 <= self.features_fast_arc <= 12:
            raise ValueError("features.fast_arc must lie in [9, 12]")
        if self.stereo_block < 3 or self.stereo_block % 2 == 0:
            raise ValueError("stereo.block must be odd and >= 3")
        if self.stereo_paths not in (4, 8):
            raise ValueError("stereo.paths must be 4 or 8")
        p1, p2 = self.stereo_penalties()
        if not p2 > p1 > 0:
            raise ValueError("stereo penalties must satisfy P2 > P1 > 0")
        if not 0 < self.inertial_crossing_ratio < 1:
            raise ValueError("inertial.crossing_ratio must lie in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


# dotted config-file key -> dataclass field
_KEY_MAP = {f.name.replace("_", ".", 1): f.name for f in fields(RunConfig)}


def _parse_value(raw: str, current):
    if isinstance(current, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw.strip()


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _KEY_MAP:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        name = _KEY_MAP[key]
        updates[name] = _parse_value(raw, getattr(cfg, name))
    return replace(cfg, **updates)


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve config: defaults < SDP_CONFIG file < explicit file < overrides."""
    cfg = RunConfig()
    env_path = os.environ.get(ENV_CONFIG)
    for p in (env_path, path):
        if p:
            with open(p, "r", encoding="utf-8") as fh:
                cfg = parse_config_text(fh.read(), cfg)
    if overrides:
        unknown = set(overrides) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


# run-control keys affect scheduling only, never results; they stay out of
# the provenance hash so reruns at other thread counts compare equal
_NON_SEMANTIC_KEYS = frozenset({"threads"})


def config_dump(cfg: RunConfig) -> str:
    lines = []
    for key in sorted(_KEY_MAP):
        if key in _NON_SEMANTIC_KEYS:
            continue
        value = getattr(cfg, _KEY_MAP[key])
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(config_dump(cfg).encode("utf-8")).hexdigest()[:16]
