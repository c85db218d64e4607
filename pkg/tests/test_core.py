import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sdp.core import finite_difference, nearest_timestamp, nearest_timestamps


class TestNearestTimestamp:
    def test_basic(self):
        assert nearest_timestamp(1.000, np.array([0.995, 1.004])) == (1, pytest.approx(0.004))

    def test_exact_match(self):
        assert nearest_timestamp(1.0, np.array([1.0])) == (0, 0.0)

    def test_equidistant_tie_prefers_earlier(self):
        idx, offset = nearest_timestamp(0.9995, np.array([0.999, 1.000]))
        assert idx == 0
        assert offset == pytest.approx(-0.0005)

    def test_empty_stream(self):
        with pytest.raises(ValueError, match="empty stream"):
            nearest_timestamp(1.0, np.array([]))

    def test_vectorized_matches_scalar(self, rng):
        stream = np.sort(rng.uniform(0, 10, size=25))
        queries = rng.uniform(-1, 11, size=50)
        idx, offsets = nearest_timestamps(queries, stream)
        for q, i, o in zip(queries, idx, offsets):
            si, so = nearest_timestamp(q, stream)
            assert (i, o) == (si, pytest.approx(so))

    @given(
        ts=st.lists(
            st.floats(min_value=0, max_value=1e4, allow_nan=False), min_size=2, max_size=40, unique=True
        ),
        frac=st.floats(min_value=0, max_value=1),
    )
    def test_offset_bounded_by_half_max_gap(self, ts, frac):
        stream = np.sort(np.array(ts))
        query = stream[0] + frac * (stream[-1] - stream[0])
        _, offset = nearest_timestamp(query, stream)
        max_gap = np.diff(stream).max()
        assert abs(offset) <= max_gap / 2 + 1e-12


class TestFiniteDifference:
    def test_linear_ramp(self):
        out, mid = finite_difference([0, 1, 2], [0, 1, 2])
        assert np.allclose(out, [1, 1])
        assert np.allclose(mid, [0.5, 1.5])

    def test_constant(self):
        out, _ = finite_difference([5, 5, 5], [0, 0.5, 1.0])
        assert np.allclose(out, [0, 0])

    def test_single_step(self):
        out, mid = finite_difference([0, 2], [0, 0.5])
        assert np.allclose(out, [4])
        assert np.allclose(mid, [0.25])

    def test_duplicate_timestamps(self):
        with pytest.raises(ValueError, match="zero dt"):
            finite_difference([1, 2, 3], [0, 0, 1])

    def test_too_short(self):
        with pytest.raises(ValueError, match="too short"):
            finite_difference([1], [0])

    def test_vector_valued(self):
        v = np.array([[0, 0], [1, 2], [2, 4]], dtype=float)
        out, _ = finite_difference(v, [0, 1, 2])
        assert np.allclose(out, [[1, 2], [1, 2]])

    @given(
        ts=st.lists(
            st.floats(min_value=0, max_value=100, allow_nan=False), min_size=2, max_size=30, unique=True
        ),
        a=st.floats(min_value=-100, max_value=100),
        b=st.floats(min_value=-100, max_value=100),
    )
    @settings(max_examples=60)
    def test_affine_series_has_constant_derivative(self, ts, a, b):
        t = np.sort(np.array(ts))
        assume(np.diff(t).min() > 1e-3)  # near-duplicate floats cancel catastrophically
        out, _ = finite_difference(a * t + b, t)
        assert np.allclose(out, a, atol=1e-6 * max(1.0, abs(a), abs(b)) + 1e-6)

    @given(
        ts=st.lists(
            st.floats(min_value=0, max_value=100, allow_nan=False), min_size=2, max_size=30, unique=True
        ),
        c=st.floats(min_value=-1e6, max_value=1e6),
    )
    @settings(max_examples=60)
    def test_constant_series_has_zero_derivative(self, ts, c):
        t = np.sort(np.array(ts))
        out, _ = finite_difference(np.full(t.size, c), t)
        assert np.all(out == 0)
