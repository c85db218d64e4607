import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdp.similarity import (
    bow_score,
    bow_vector,
    brief_pattern,
    build_vocabulary,
    closest_match,
    describe,
    fit_idf,
    hamming,
    load_vocabulary,
    save_vocabulary,
)


def planted_descriptors(rng, n_clusters=4, per_cluster=30, flip_bits=5):
    protos = rng.integers(0, 256, size=(n_clusters, 32)).astype(np.uint8)
    sample, labels = [], []
    for i, proto in enumerate(protos):
        bits = np.unpackbits(proto)
        for _ in range(per_cluster):
            d = bits.copy()
            d[rng.choice(256, size=flip_bits, replace=False)] ^= 1
            sample.append(np.packbits(d))
            labels.append(i)
    return np.stack(sample), np.array(labels)


# normalized sparse vectors over a small word universe
def _normalize(weights):
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items() if v > 0}


bow_vectors = st.dictionaries(
    st.integers(min_value=0, max_value=30),
    st.floats(min_value=1e-3, max_value=1.0),
    min_size=1,
    max_size=10,
).map(_normalize)


class TestVocabulary:
    def test_planted_clusters_are_pure(self, rng):
        sample, labels = planted_descriptors(rng)
        vocab = build_vocabulary(sample, k=4, depth=1, seed=0)
        words = vocab.words(sample)
        assert vocab.n_words == 4
        for i in range(4):
            assert len(set(words[labels == i])) == 1

    def test_degenerate_single_branch(self, rng):
        sample, _ = planted_descriptors(rng, n_clusters=2, per_cluster=10)
        vocab = build_vocabulary(sample, k=1, depth=2, seed=0)
        assert vocab.n_words == 1
        assert np.all(vocab.idf == vocab.idf[0])

    def test_same_seed_same_tree(self, rng):
        sample, _ = planted_descriptors(rng)
        a = build_vocabulary(sample, k=3, depth=2, seed=11)
        b = build_vocabulary(sample, k=3, depth=2, seed=11)
        assert len(a.nodes) == len(b.nodes)
        for na, nb in zip(a.nodes, b.nodes):
            assert na.word_id == nb.word_id and na.children == nb.children
            assert (na.center is None and nb.center is None) or np.array_equal(na.center, nb.center)
        assert np.array_equal(a.words(sample), b.words(sample))

    def test_sample_smaller_than_k(self, rng):
        with pytest.raises(ValueError):
            build_vocabulary(rng.integers(0, 256, size=(3, 32)).astype(np.uint8), k=10, depth=2, seed=0)

    def test_quantization_is_a_function(self, rng):
        sample, _ = planted_descriptors(rng)
        vocab = build_vocabulary(sample, k=4, depth=2, seed=3)
        assert np.array_equal(vocab.words(sample), vocab.words(sample))

    def test_idf_nonnegative(self, rng):
        sample, _ = planted_descriptors(rng)
        vocab = build_vocabulary(sample, k=4, depth=1, seed=0)
        fit_idf(vocab, [sample[:30], sample[30:60], sample])
        assert np.all(vocab.idf >= 0)

    def test_save_load_roundtrip(self, rng, tmp_path):
        sample, _ = planted_descriptors(rng)
        vocab = build_vocabulary(sample, k=4, depth=2, seed=5)
        fit_idf(vocab, [sample[:40], sample[40:]])
        path = str(tmp_path / "vocab.txt")
        save_vocabulary(vocab, path)
        loaded = load_vocabulary(path)
        assert loaded.n_words == vocab.n_words
        assert np.allclose(loaded.idf, vocab.idf)
        assert np.array_equal(loaded.words(sample), vocab.words(sample))


class TestBowScore:
    def test_identity(self):
        v = {1: 0.25, 2: 0.75}
        assert bow_score(v, v) == 1.0

    def test_disjoint_supports(self):
        assert bow_score({1: 1.0}, {2: 1.0}) == 0.0

    def test_half_overlap(self):
        assert bow_score({1: 1.0}, {1: 0.5, 2: 0.5}) == pytest.approx(0.5)

    def test_empty_never_matches(self):
        assert bow_score({}, {}) == 0.0
        assert bow_score({}, {1: 1.0}) == 0.0

    @given(v1=bow_vectors, v2=bow_vectors)
    @settings(max_examples=100)
    def test_symmetric_and_bounded(self, v1, v2):
        s = bow_score(v1, v2)
        assert s == pytest.approx(bow_score(v2, v1))
        assert -1e-12 <= s <= 1.0 + 1e-12

    @given(v=bow_vectors)
    def test_self_score_one(self, v):
        assert bow_score(v, v) == pytest.approx(1.0)


def oracle_closest(vectors, min_gap):
    """Independent exhaustive reference with the same tie rules."""
    results = {}
    n = len(vectors)
    for i in range(n):
        candidates = []
        for j in range(n):
            if j != i and abs(i - j) >= min_gap:
                candidates.append((-bow_score(vectors[i], vectors[j]), abs(i - j), j))
        if candidates:
            score, dist, _ = min(candidates)
            results[i] = (-score, dist)
    return results


class TestClosestMatch:
    def test_aba_sequence(self):
        a = {1: 0.6, 2: 0.4}
        b = {3: 1.0}
        report = closest_match([a, b, a], min_gap=1)
        assert report.scores[0] == pytest.approx(1.0)
        assert report.distances[0] == 2

    def test_all_identical(self):
        v = {7: 1.0}
        report = closest_match([v, v, v, v], min_gap=1)
        assert np.all(report.distances == 1)
        assert np.all(report.scores == 1.0)
        assert report.counts[1.0] == 4

    def test_too_short(self):
        with pytest.raises(ValueError):
            closest_match([{1: 1.0}], min_gap=1)

    def test_matches_oracle(self, rng):
        vectors = []
        for _ in range(60):
            words = rng.choice(40, size=rng.integers(1, 6), replace=False)
            weights = rng.uniform(0.1, 1.0, size=words.size)
            vectors.append({int(w): float(x / weights.sum()) for w, x in zip(words, weights)})
        for min_gap in (1, 3):
            report = closest_match(vectors, min_gap)
            ref = oracle_closest(vectors, min_gap)
            assert list(report.frame_indices) == sorted(ref)
            for idx, score, dist in zip(report.frame_indices, report.scores, report.distances):
                assert score == pytest.approx(ref[idx][0])
                assert dist == ref[idx][1]

    def test_min_gap_excludes_neighbors(self):
        near = {1: 1.0}
        far = {1: 0.5, 2: 0.5}
        report = closest_match([near, near, far, near], min_gap=2)
        # frame 0: frames 2,3 admissible; frame 3 identical at distance 3,
        # frame 2 scores 0.5 at distance 2
        assert report.scores[0] == pytest.approx(1.0)
        assert report.distances[0] == 3

    def test_loop_opportunity_pct(self):
        v = {1: 1.0}
        w = {2: 1.0}
        report = closest_match([v, w, v], min_gap=1)
        # frames 0 and 2 match each other at score 1; frame 1 scores 0
        assert report.loop_opportunity_pct == pytest.approx(100 * 2 / 3)


class TestDescriptors:
    def test_pattern_deterministic(self):
        assert np.array_equal(brief_pattern(4), brief_pattern(4))
        assert not np.array_equal(brief_pattern(4), brief_pattern(5))

    def test_describe_deterministic(self, rng):
        from sdp.features import detect_orb_style

        img = rng.integers(0, 256, size=(64, 64)).astype(np.uint8)
        kps = detect_orb_style(img, 20, max_keypoints=50)
        pattern = brief_pattern(0)
        assert np.array_equal(describe(img, kps, pattern), describe(img, kps, pattern))

    def test_empty_keypoints(self, rng):
        img = rng.integers(0, 256, size=(32, 32)).astype(np.uint8)
        assert describe(img, [], brief_pattern(0)).shape == (0, 32)

    def test_bow_vector_l1_normalized(self, rng):
        sample, _ = planted_descriptors(rng)
        vocab = build_vocabulary(sample, k=4, depth=2, seed=0)
        fit_idf(vocab, [sample[:40], sample[40:80], sample[80:]])
        vec = bow_vector(vocab, sample[:25])
        assert sum(vec.values()) == pytest.approx(1.0)

    def test_hamming_symmetry(self, rng):
        a = rng.integers(0, 256, size=(5, 32)).astype(np.uint8)
        b = rng.integers(0, 256, size=(7, 32)).astype(np.uint8)
        assert np.array_equal(hamming(a, b), hamming(b, a).T)
