"""Frame cosine similarity and DTW alignment of frame sequences.

Sequences are [T, D] matrices.  Alignment minimizes the accumulated frame
distance d(i, j) = 1 − cos(A_i, B_j) over monotone warping paths with steps
{(1, 0), (0, 1), (1, 1)}; the headline score is then the *average cosine
similarity* along the optimal path, normalized by path length, so it stays
in [−1, 1] and equals 1 for identical sequences of nonzero frames.

Zero-norm frames have cosine 0 against everything by convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels


def _snap_unit(sim: np.ndarray, dim: int) -> np.ndarray:
    """Clip cosines to [−1, 1], snapping rounding residue onto the bounds.

    A dot product of D normalized coordinates carries O(D·eps) rounding, so a
    value that close to ±1 is indistinguishable from ±1; snapping it makes
    identical sequences score exactly 1 (and accumulate exactly zero DTW
    distance) instead of 1 minus a few ulps.
    """
    tol = 4.0 * max(dim, 8) * np.finfo(np.float64).eps
    sim = np.where(np.abs(sim) >= 1.0 - tol, np.sign(sim), sim)
    return np.clip(sim, -1.0, 1.0)


def frame_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two D-vectors; 0 if either has zero norm."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise ValueError(f"expected equal-length 1-D vectors, got {va.shape} and {vb.shape}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(_snap_unit(np.dot(va, vb) / (na * nb), va.size))


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise frame cosine similarities between two sequences.

    Args:
        a: [T_A, D] matrix.
        b: [T_B, D] matrix.

    Returns:
        [T_A, T_B] float64 matrix with entries in [−1, 1]; rows/columns for
        zero-norm frames are 0.
    """
    ma = np.asarray(a, dtype=np.float64)
    mb = np.asarray(b, dtype=np.float64)
    if ma.ndim != 2 or mb.ndim != 2 or ma.shape[1] != mb.shape[1]:
        raise ValueError(
            f"expected [T, D] matrices with matching D, got {ma.shape} and {mb.shape}"
        )
    norms_a = np.linalg.norm(ma, axis=1)
    norms_b = np.linalg.norm(mb, axis=1)
    ua = np.divide(ma, norms_a[:, None], out=np.zeros_like(ma), where=norms_a[:, None] != 0)
    ub = np.divide(mb, norms_b[:, None], out=np.zeros_like(mb), where=norms_b[:, None] != 0)
    return _snap_unit(ua @ ub.T, ma.shape[1])


@dataclass(frozen=True)
class Alignment:
    """An optimal warping path and its accumulated frame distance.

    ``path`` holds 0-based (i, j) index pairs from (0, 0) to
    (T_A − 1, T_B − 1); consecutive steps are in {(1,0), (0,1), (1,1)}, so
    the path length is at least max(T_A, T_B).
    """

    path: np.ndarray
    accumulated_cost: float

    def __len__(self) -> int:
        return len(self.path)


def dtw_align(a: np.ndarray, b: np.ndarray, *, backend: str | None = None) -> Alignment:
    """Optimal alignment of two sequences under accumulated 1 − cosine.

    Ties during traceback prefer the diagonal step, then (1, 0), then
    (0, 1), making the returned path fully deterministic.

    Args:
        a: [T_A, D] matrix, T_A ≥ 1.
        b: [T_B, D] matrix, T_B ≥ 1.
        backend: kernel selection ("compiled", "pure", or None for default).

    Returns:
        Alignment with minimal accumulated cost.
    """
    sim = cosine_matrix(a, b)
    if sim.shape[0] < 1 or sim.shape[1] < 1:
        raise ValueError("sequences must hold at least one frame each")
    kernel = _kernels.get_backend(backend)
    cost, path = kernel.align(1.0 - sim)
    return Alignment(path=path, accumulated_cost=cost)


def path_avg_similarity(a: np.ndarray, b: np.ndarray, *, backend: str | None = None) -> float:
    """Mean frame cosine similarity along the optimal warping path.

    Symmetric in its arguments (the step set and distance are symmetric)
    and bounded in [−1, 1].
    """
    sim = cosine_matrix(a, b)
    if sim.shape[0] < 1 or sim.shape[1] < 1:
        raise ValueError("sequences must hold at least one frame each")
    kernel = _kernels.get_backend(backend)
    _, path = kernel.align(1.0 - sim)
    return float(np.mean(sim[path[:, 0], path[:, 1]]))
