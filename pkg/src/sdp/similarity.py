"""Bag-of-visual-words image description and intra-sequence retrieval.

Frames are described by 256-bit oriented binary descriptors (pairwise
intensity tests on a smoothed patch, rotated by keypoint orientation),
quantized through a hierarchical k-medians vocabulary into tf-idf word
histograms, and compared with the L1 score

    s(v1, v2) = 1 - 0.5 * sum_w |v1_w - v2_w|

over L1-normalized vectors. The default vocabulary is trained from a
descriptor subsample of the corpus itself with a pinned seed, so scores are
deterministic; an externally trained vocabulary file can be swapped in when
cross-corpus comparability matters more than self-containedness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = DESCRIPTOR_BITS // 8
PATCH_RADIUS = 15
SMOOTH_WINDOW = 5


def brief_pattern(seed: int) -> np.ndarray:
    """(256, 4) int array of (y1, x1, y2, x2) test offsets, Gaussian-placed."""
    rng = np.random.default_rng(seed)
    sigma = (2 * PATCH_RADIUS + 1) / 5.0
    pts = rng.normal(0.0, sigma, size=(DESCRIPTOR_BITS, 4))
    return np.clip(np.rint(pts), -PATCH_RADIUS, PATCH_RADIUS).astype(np.int32)


def _smooth(gray: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    half = window // 2
    padded = np.pad(np.asarray(gray, dtype=np.float64), half, mode="edge")
    s = np.cumsum(np.cumsum(padded, axis=0), axis=1)
    s = np.pad(s, ((1, 0), (1, 0)))
    h, w = gray.shape
    total = s[window : window + h, window : window + w]
    total = total - s[:h, window : window + w] - s[window : window + h, :w] + s[:h, :w]
    return total / (window * window)


def describe(gray: np.ndarray, keypoints, pattern: np.ndarray) -> np.ndarray:
    """Oriented binary descriptors, one row of 32 bytes per keypoint.

    Pattern offsets rotate with each keypoint's orientation (unoriented
    keypoints use angle 0); sample points clamp to the image border.
    """
    img = _smooth(gray)
    h, w = img.shape
    if not keypoints:
        return np.zeros((0, DESCRIPTOR_BYTES), dtype=np.uint8)
    base = pattern.astype(np.float64)
    angles = np.array([kp.orientation or 0.0 for kp in keypoints])
    kx = np.array([kp.x for kp in keypoints])[:, None]
    ky = np.array([kp.y for kp in keypoints])[:, None]
    c = np.cos(angles)[:, None]
    s = np.sin(angles)[:, None]

    def sample(oy, ox):
        yy = np.clip(np.rint(oy[None] * c + ox[None] * s) + ky, 0, h - 1).astype(np.intp)
        xx = np.clip(np.rint(-oy[None] * s + ox[None] * c) + kx, 0, w - 1).astype(np.intp)
        return img[yy, xx]

    bits = sample(base[:, 0], base[:, 1]) < sample(base[:, 2], base[:, 3])
    return np.packbits(bits.astype(np.uint8), axis=1)


def hamming(descriptors: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(N, K) Hamming distances between byte-packed descriptor rows."""
    return np.bitwise_count(descriptors[:, None, :] ^ centers[None, :, :]).sum(axis=2)


def _majority_bits(descriptors: np.ndarray) -> np.ndarray:
    """Per-bit majority vote (ties fall to 0), packed back into bytes."""
    bits = np.unpackbits(descriptors, axis=1)
    majority = bits.sum(axis=0) * 2 > descriptors.shape[0]
    return np.packbits(majority.astype(np.uint8))


def _maximin_init(descriptors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Farthest-point seeding: robust to clustered samples, seed-deterministic."""
    n = descriptors.shape[0]
    chosen = [int(rng.integers(n))]
    dist = hamming(descriptors, descriptors[chosen])[:, 0]
    while len(chosen) < k:
        nxt = int(dist.argmax())
        chosen.append(nxt)
        dist = np.minimum(dist, hamming(descriptors, descriptors[[nxt]])[:, 0])
    return descriptors[chosen].copy()


def _kmedians(descriptors: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 25):
    """Binary k-medians: Hamming assignment, majority-bit center updates."""
    centers = _maximin_init(descriptors, k, rng)
    assign = np.full(descriptors.shape[0], -1)
    for _ in range(max_iter):
        new_assign = hamming(descriptors, centers).argmin(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for j in range(k):
            members = descriptors[assign == j]
            if members.shape[0]:
                centers[j] = _majority_bits(members)
    return centers, assign


@dataclass
class _Node:
    center: np.ndarray | None
    children: list[int] = field(default_factory=list)
    word_id: int = -1


@dataclass
class Vocabulary:
    """Hierarchical k-medians tree over binary descriptors with idf weights."""

    k: int
    depth: int
    nodes: list[_Node]
    idf: np.ndarray  # (n_words,)

    @property
    def n_words(self) -> int:
        return self.idf.shape[0]

    def word(self, descriptor: np.ndarray) -> int:
        return int(self.words(descriptor[None])[0])

    def words(self, descriptors: np.ndarray) -> np.ndarray:
        """Quantize descriptors to leaf word ids, level by level."""
        n = descriptors.shape[0]
        out = np.full(n, -1, dtype=np.int64)
        node_of = np.zeros(n, dtype=np.int64)
        active = np.arange(n)
        while active.size:
            still = []
            for node_id in np.unique(node_of[active]):
                members = active[node_of[active] == node_id]
                node = self.nodes[node_id]
                if not node.children:
                    out[members] = node.word_id
                    continue
                centers = np.stack([self.nodes[c].center for c in node.children])
                choice = hamming(descriptors[members], centers).argmin(axis=1)
                node_of[members] = np.array(node.children)[choice]
                still.append(members)
            active = np.concatenate(still) if still else np.empty(0, dtype=np.int64)
        return out


def build_vocabulary(sample: np.ndarray, k: int, depth: int, seed: int) -> Vocabulary:
    """Cluster a descriptor sample into a k-ary tree of up to k^depth words.

    Clustering is k-medians with majority-bit centers under Hamming
    assignment; nodes holding fewer than k descriptors become leaves early.
    The same seed always yields the same tree. idf weights are initialized
    to 1 until fitted against a training corpus (see fit_idf).
    """
    if sample.shape[0] < k:
        raise ValueError("descriptor sample smaller than branching factor")
    rng = np.random.default_rng(seed)
    nodes = [_Node(center=None)]
    word_count = 0

    def split(node_id: int, descriptors: np.ndarray, level: int):
        nonlocal word_count
        if level >= depth or descriptors.shape[0] < k:
            nodes[node_id].word_id = word_count
            word_count += 1
            return
        centers, assign = _kmedians(descriptors, k, rng)
        for j in range(k):
            child = _Node(center=centers[j])
            nodes.append(child)
            child_id = len(nodes) - 1
            nodes[node_id].children.append(child_id)
            members = descriptors[assign == j]
            if members.shape[0] == 0:
                # empty cluster: the child still quantizes future
                # descriptors that land nearest to its center
                child.word_id = word_count
                word_count += 1
            else:
                split(child_id, members, level + 1)

    split(0, np.asarray(sample, dtype=np.uint8), 0)
    return Vocabulary(k=k, depth=depth, nodes=nodes, idf=np.ones(word_count))


def fit_idf(vocab: Vocabulary, image_descriptors: list[np.ndarray]) -> None:
    """Set idf_w = max(0, ln(N / (1 + n_w))) from a training image corpus."""
    n_images = len(image_descriptors)
    if n_images == 0:
        return
    contains = np.zeros(vocab.n_words)
    for desc in image_descriptors:
        if desc.shape[0]:
            contains[np.unique(vocab.words(desc))] += 1
    with np.errstate(divide="ignore"):
        idf = np.log(n_images / (1.0 + contains))
    vocab.idf = np.maximum(idf, 0.0)


BowVector = dict[int, float]


def bow_vector(vocab: Vocabulary, descriptors: np.ndarray) -> BowVector:
    """tf-idf word histogram, L1-normalized; featureless images map to {}.

    When every word an image uses has zero idf (degenerate tiny corpora
    where each word occurs in every image), the vector falls back to plain
    term frequencies so identical frames still score 1.
    """
    if descriptors.shape[0] == 0:
        return {}
    words, counts = np.unique(vocab.words(descriptors), return_counts=True)
    tf = counts / counts.sum()
    weights = tf * vocab.idf[words]
    total = weights.sum()
    if total == 0.0:
        weights, total = tf, tf.sum()
    return {int(w): float(v / total) for w, v in zip(words, weights) if v > 0.0}


def bow_score(v1: BowVector, v2: BowVector) -> float:
    """L1 similarity in [0, 1]; empty (featureless) vectors never match."""
    if not v1 or not v2:
        return 0.0
    keys = set(v1) | set(v2)
    l1 = sum(abs(v1.get(k, 0.0) - v2.get(k, 0.0)) for k in keys)
    return 1.0 - 0.5 * l1


@dataclass
class SimilarityReport:
    frame_indices: np.ndarray  # frames that had at least one candidate match
    scores: np.ndarray  # best score per listed frame
    distances: np.ndarray  # |i - j| of the best match per listed frame
    min_gap: int
    counts: dict[float, int]  # threshold -> frames with best score >= threshold
    loop_opportunity_pct: float  # % of frames with best score >= 0.3

    SCORE_THRESHOLDS = (1.0, 0.9, 0.5)
    LOOP_SCORE = 0.3


def closest_match(vectors: list[BowVector], min_gap: int = 1) -> SimilarityReport:
    """Best intra-sequence match per frame, at least min_gap frames away.

    Ties prefer the temporally closer frame, then the earlier one, so the
    result is deterministic. Frames with no admissible candidate (possible
    mid-sequence when min_gap > 1) are left out of the report. O(n^2)
    pairwise scoring; fine for per-sequence fixture and benchmark scales.
    """
    n = len(vectors)
    if n < min_gap + 1:
        raise ValueError("sequence shorter than min gap + 1")
    indices, scores, distances = [], [], []
    for i in range(n):
        best_score, best_dist, best_j = -1.0, -1, -1
        for j in range(n):
            dist = abs(i - j)
            if dist < min_gap or i == j:
                continue
            s = bow_score(vectors[i], vectors[j])
            if s > best_score or (s == best_score and (dist, j) < (best_dist, best_j)):
                best_score, best_dist, best_j = s, dist, j
        if best_j >= 0:
            indices.append(i)
            scores.append(best_score)
            distances.append(best_dist)
    scores = np.array(scores)
    distances = np.array(distances, dtype=np.int64)
    counts = {t: int((scores >= t).sum()) for t in SimilarityReport.SCORE_THRESHOLDS}
    loop_pct = float(100.0 * (scores >= SimilarityReport.LOOP_SCORE).mean()) if scores.size else 0.0
    return SimilarityReport(
        frame_indices=np.array(indices, dtype=np.int64),
        scores=scores,
        distances=distances,
        min_gap=min_gap,
        counts=counts,
        loop_opportunity_pct=loop_pct,
    )


VOCAB_MAGIC = "sdp-vocab 1"


def save_vocabulary(vocab: Vocabulary, path: str) -> None:
    """Versioned text format: tree structure, hex centers, idf table."""
    lines = [VOCAB_MAGIC, f"k {vocab.k}", f"depth {vocab.depth}", f"nodes {len(vocab.nodes)}"]
    for i, node in enumerate(vocab.nodes):
        center_hex = node.center.tobytes().hex() if node.center is not None else "-"
        children = ",".join(str(c) for c in node.children) or "-"
        lines.append(f"node {i} {center_hex} {children} {node.word_id}")
    lines.append(f"words {vocab.n_words}")
    for w, v in enumerate(vocab.idf):
        lines.append(f"idf {w} {float(v)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_vocabulary(path: str) -> Vocabulary:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != VOCAB_MAGIC:
        raise ValueError(f"not a vocabulary file: {path}")
    k = int(lines[1].split()[1])
    depth = int(lines[2].split()[1])
    n_nodes = int(lines[3].split()[1])
    nodes = []
    pos = 4
    for _ in range(n_nodes):
        _, _idx, center_hex, children, word_id = lines[pos].split()
        center = None
        if center_hex != "-":
            center = np.frombuffer(bytes.fromhex(center_hex), dtype=np.uint8).copy()
        child_ids = [] if children == "-" else [int(c) for c in children.split(",")]
        nodes.append(_Node(center=center, children=child_ids, word_id=int(word_id)))
        pos += 1
    n_words = int(lines[pos].split()[1])
    pos += 1
    idf = np.ones(n_words)
    for _ in range(n_words):
        _, w, v = lines[pos].split()
        idf[int(w)] = float(v)
        pos += 1
    return Vocabulary(k=k, depth=depth, nodes=nodes, idf=idf)
