"""Kernel backends: contract conformance and compiled/pure bit identity."""

from __future__ import annotations

import numpy as np
import pytest

from mp3s_eval import _kernels
from mp3s_eval._kernels import _dtw_py

HAS_COMPILED = _kernels.BACKEND == "compiled"

needs_compiled = pytest.mark.skipif(
    not HAS_COMPILED, reason="compiled kernel not built in this installation"
)


class TestBackendSelection:
    def test_backend_name_is_known(self):
        assert _kernels.BACKEND in ("compiled", "pure")

    def test_default_and_auto_agree(self):
        assert _kernels.get_backend(None) is _kernels.get_backend("auto")

    def test_pure_always_available(self):
        assert _kernels.get_backend("pure") is _dtw_py

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="unknown kernel backend 'gpu'"):
            _kernels.get_backend("gpu")

    @needs_compiled
    def test_compiled_selected_when_built(self):
        mod = _kernels.get_backend("compiled")
        assert mod is not _dtw_py
        assert _kernels.align is mod.align


def _contract_checks(kernel, d):
    """Assert the kernel output obeys the alignment contract for matrix d."""
    cost, path = kernel.align(np.asarray(d, dtype=np.float64))
    ta, tb = np.asarray(d).shape
    assert isinstance(cost, float)
    assert path.dtype == np.int64
    assert path.ndim == 2 and path.shape[1] == 2
    assert tuple(path[0]) == (0, 0)
    assert tuple(path[-1]) == (ta - 1, tb - 1)
    steps = np.diff(path, axis=0)
    assert all(tuple(s) in {(1, 0), (0, 1), (1, 1)} for s in steps)
    assert max(ta, tb) <= len(path) <= ta + tb - 1
    # The reported cost is exactly the forward fold of d along the path.
    acc = 0.0
    for i, j in path:
        acc = acc + d[i][j]
    assert cost == acc
    return cost, path


class TestKernelContract:
    @pytest.mark.parametrize("backend", ["pure", "compiled"])
    @pytest.mark.parametrize(
        "shape", [(1, 1), (1, 4), (4, 1), (2, 2), (3, 5), (6, 6)]
    )
    def test_shapes(self, backend, shape, rng=np.random.default_rng(11)):
        if backend == "compiled" and not HAS_COMPILED:
            pytest.skip("compiled kernel not built")
        kernel = _kernels.get_backend(backend)
        d = rng.uniform(0.0, 2.0, size=shape)
        _contract_checks(kernel, d)

    @pytest.mark.parametrize("backend", ["pure", "compiled"])
    def test_tie_break_prefers_diagonal(self, backend):
        if backend == "compiled" and not HAS_COMPILED:
            pytest.skip("compiled kernel not built")
        kernel = _kernels.get_backend(backend)
        _, path = kernel.align(np.zeros((3, 3)))
        assert path.tolist() == [[0, 0], [1, 1], [2, 2]]

    @pytest.mark.parametrize("backend", ["pure", "compiled"])
    def test_tie_break_prefers_row_advance_over_column(self, backend):
        # Predecessors of (1,1): diagonal costs 5; the two single-step
        # predecessors tie at 1, so the (1,0) step — predecessor (0,1) —
        # must win over the (0,1) step.
        if backend == "compiled" and not HAS_COMPILED:
            pytest.skip("compiled kernel not built")
        kernel = _kernels.get_backend(backend)
        d = np.array([[5.0, -4.0], [-4.0, 0.0]])
        cost, path = kernel.align(d)
        assert path.tolist() == [[0, 0], [0, 1], [1, 1]]
        assert cost == 1.0


@needs_compiled
class TestBitIdentity:
    """Pure Python floats and C doubles are both IEEE-754 binary64; with the
    same operation order the two kernels must agree bit for bit."""

    def test_costs_and_paths_identical(self):
        rng = np.random.default_rng(2024)
        pure = _kernels.get_backend("pure")
        compiled = _kernels.get_backend("compiled")
        for _ in range(200):
            ta, tb = rng.integers(1, 12, size=2)
            d = rng.uniform(0.0, 2.0, size=(ta, tb))
            c_pure, p_pure = pure.align(d)
            c_comp, p_comp = compiled.align(d)
            assert c_pure == c_comp  # exact, no tolerance
            assert np.array_equal(p_pure, p_comp)

    def test_identical_on_adversarial_ties(self):
        pure = _kernels.get_backend("pure")
        compiled = _kernels.get_backend("compiled")
        rng = np.random.default_rng(5)
        for _ in range(50):
            # Few distinct values force many exact ties in the DP table.
            d = rng.choice([0.0, 0.5, 1.0], size=(7, 7))
            c_pure, p_pure = pure.align(d)
            c_comp, p_comp = compiled.align(d)
            assert c_pure == c_comp
            assert np.array_equal(p_pure, p_comp)
