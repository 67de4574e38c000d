"""DTW alignment against an exhaustive path-enumeration oracle."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mp3s_eval.headless.dtw import (
    Alignment,
    cosine_matrix,
    dtw_align,
    frame_cosine,
    path_avg_similarity,
)


@lru_cache(maxsize=None)
def all_paths(ta: int, tb: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Every admissible warping path through a [ta, tb] grid.

    Paths run from (0, 0) to (ta-1, tb-1) with steps {(1,0), (0,1), (1,1)}.
    """
    if ta == 1 and tb == 1:
        return (((0, 0),),)
    paths = []
    for pta, ptb in ((ta - 1, tb), (ta, tb - 1), (ta - 1, tb - 1)):
        if pta >= 1 and ptb >= 1:
            for prefix in all_paths(pta, ptb):
                paths.append(prefix + ((ta - 1, tb - 1),))
    return tuple(paths)


def fold_cost(d: np.ndarray, path) -> float:
    """Forward left-fold of d along a path — the DP's own summation order."""
    acc = 0.0
    for i, j in path:
        acc = acc + float(d[i, j])
    return acc


def brute_force_min_cost(d: np.ndarray) -> float:
    return min(fold_cost(d, p) for p in all_paths(*d.shape))


class TestPathEnumerationOracle:
    def test_path_counts_are_delannoy(self):
        # Lattice path counts with these 3 steps are the Delannoy numbers:
        # an independent combinatorial check that the enumerator is complete.
        delannoy = {(1, 1): 1, (2, 2): 3, (3, 3): 13, (4, 4): 63,
                    (2, 3): 5, (3, 5): 41, (1, 6): 1, (6, 1): 1}
        for (ta, tb), count in delannoy.items():
            assert len(all_paths(ta, tb)) == count

    def test_dp_cost_equals_enumerated_minimum_exactly(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            ta, tb = rng.integers(1, 7, size=2)
            dim = rng.integers(1, 5)
            a = rng.normal(size=(ta, dim))
            b = rng.normal(size=(tb, dim))
            d = 1.0 - cosine_matrix(a, b)
            got = dtw_align(a, b).accumulated_cost
            assert got == brute_force_min_cost(d)  # bit-exact

    def test_returned_path_is_admissible_and_optimal(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            ta, tb = rng.integers(1, 7, size=2)
            a = rng.normal(size=(ta, 3))
            b = rng.normal(size=(tb, 3))
            align = dtw_align(a, b)
            path = tuple(map(tuple, align.path))
            assert path in all_paths(ta, tb)
            d = 1.0 - cosine_matrix(a, b)
            assert fold_cost(d, path) == align.accumulated_cost


class TestFrameCosine:
    def test_orthogonal(self):
        assert frame_cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_scale_invariance(self):
        assert frame_cosine(np.array([1.0, 1.0]), np.array([2.0, 2.0])) == 1.0

    def test_zero_norm_convention(self):
        assert frame_cosine(np.array([0.0, 0.0]), np.array([1.0, 0.0])) == 0.0
        assert frame_cosine(np.zeros(3), np.zeros(3)) == 0.0

    def test_antiparallel(self):
        assert frame_cosine(np.array([1.0, 2.0]), np.array([-1.0, -2.0])) == -1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="equal-length"):
            frame_cosine(np.zeros(2), np.zeros(3))

    def test_clipped_to_unit_interval(self):
        # Accumulated rounding can push |cos| past 1 by a few ulps; the
        # result must still be a valid cosine.
        v = np.full(50, 0.1 + 1e-17)
        assert -1.0 <= frame_cosine(v, v) <= 1.0

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_bounded_and_symmetric(self, seed, dim):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(2, dim))
        c = frame_cosine(a, b)
        assert -1.0 <= c <= 1.0
        assert c == frame_cosine(b, a)


class TestCosineMatrix:
    def test_matches_pairwise_frame_cosine(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(5, 3))
        m = cosine_matrix(a, b)
        assert m.shape == (4, 5)
        for i in range(4):
            for j in range(5):
                assert m[i, j] == pytest.approx(frame_cosine(a[i], b[j]),
                                                abs=1e-12)

    def test_zero_rows_give_zero_cosine(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0]])
        b = np.array([[1.0, 1.0]])
        m = cosine_matrix(a, b)
        assert m[0, 0] == 0.0
        assert m[1, 0] == pytest.approx(np.sqrt(0.5))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="matching D"):
            cosine_matrix(np.zeros((2, 3)), np.zeros((2, 4)))


class TestDtwAlign:
    def test_self_alignment_is_diagonal(self):
        rng = np.random.default_rng(3)
        for t in (1, 2, 5):
            a = rng.normal(size=(t, 4))
            align = dtw_align(a, a)
            assert align.path.tolist() == [[i, i] for i in range(t)]
            assert align.accumulated_cost == 0.0

    def test_single_admissible_path_two_by_one(self):
        # Orthogonal unit frames: only one grid column, so the single
        # admissible path visits both rows.
        a = np.array([[1.0, 0.0], [0.0, 1.0]])
        b = np.array([[1.0, 0.0]])
        align = dtw_align(a, b)
        assert align.path.tolist() == [[0, 0], [1, 0]]
        assert align.accumulated_cost == 1.0  # (1-1) + (1-0)

    def test_result_type(self):
        align = dtw_align(np.ones((2, 2)), np.ones((3, 2)))
        assert isinstance(align, Alignment)
        assert len(align) == 3

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError, match="at least one frame"):
            dtw_align(np.zeros((0, 2)), np.zeros((3, 2)))
        with pytest.raises(ValueError, match="at least one frame"):
            dtw_align(np.zeros((3, 2)), np.zeros((0, 2)))

    def test_backend_argument(self):
        a = np.random.default_rng(0).normal(size=(4, 3))
        b = np.random.default_rng(1).normal(size=(5, 3))
        assert dtw_align(a, b, backend="pure").accumulated_cost == \
            dtw_align(a, b).accumulated_cost

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 8))
    def test_path_shape_invariants(self, seed, ta, tb):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(ta, 3))
        b = rng.normal(size=(tb, 3))
        path = dtw_align(a, b).path
        assert tuple(path[0]) == (0, 0)
        assert tuple(path[-1]) == (ta - 1, tb - 1)
        steps = {tuple(s) for s in np.diff(path, axis=0)}
        assert steps <= {(1, 0), (0, 1), (1, 1)}
        assert max(ta, tb) <= len(path) <= ta + tb - 1


class TestPathAvgSimilarity:
    def test_identical_single_frames(self):
        a = np.array([[0.3, -0.7]])
        assert path_avg_similarity(a, a) == 1.0

    def test_two_frame_example(self):
        a = np.array([[1.0, 0.0], [0.0, 1.0]])
        b = np.array([[1.0, 0.0]])
        assert path_avg_similarity(a, b) == 0.5  # (1 + 0) / 2

    def test_three_frame_example(self):
        a = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        b = np.array([[1.0, 0.0], [0.0, 1.0]])
        align = dtw_align(a, b)
        assert align.path.tolist() == [[0, 0], [1, 0], [2, 1]]
        assert path_avg_similarity(a, b) == 1.0

    def test_identical_sequences_score_one(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(6, 4))
        assert path_avg_similarity(a, a) == 1.0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 7), st.integers(1, 7))
    def test_symmetric_and_bounded(self, seed, ta, tb):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(ta, 4))
        b = rng.normal(size=(tb, 4))
        s_ab = path_avg_similarity(a, b)
        s_ba = path_avg_similarity(b, a)
        assert -1.0 <= s_ab <= 1.0
        assert s_ab == pytest.approx(s_ba, abs=1e-6)
