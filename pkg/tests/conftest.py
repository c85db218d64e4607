import os
import sys

import numpy as np
import pytest

SCRIPTS_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "scripts")
sys.path.insert(0, os.path.abspath(SCRIPTS_DIR))

import make_demo_dataset  # noqa: E402


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """Full demo corpus: KITTI layout (2 seq) + ASL layout (3 seq, IMU)."""
    root = tmp_path_factory.mktemp("corpus")
    kitti = make_demo_dataset.build_kitti(str(root / "kitti_demo"), seed=0)
    asl = make_demo_dataset.build_asl(str(root / "asl_demo"), seed=1)
    return {"kitti": kitti, "asl": asl}


@pytest.fixture(scope="session")
def tiny_asl(tmp_path_factory):
    """Small ASL tree (2 seq, 6 frames, 40 IMU rows) for fast handler tests."""
    root = tmp_path_factory.mktemp("tiny") / "asl"
    return make_demo_dataset.build_asl(
        str(root), n_sequences=2, n_frames=6, n_imu=40, seed=5
    )


@pytest.fixture
def fast_config():
    """Config sized for 64x96 fixture frames."""
    from dataclasses import replace

    from sdp.config import RunConfig

    return replace(
        RunConfig(),
        stereo_d_max=16,
        stereo_block=7,
        image_blur_tile=16,
        image_feature_bin=16,
        similarity_vocab_frames_per_seq=4,
        similarity_max_descriptors=120,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
