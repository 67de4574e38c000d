"""ABX discriminability error over mined triplets.

For each triplet (A, B, X) the aggregated representations are compared with
the DTW path-average cosine similarity S.  The triplet scores 1 when
S(X, B) > S(X, A), 0.5 on an exact tie, and 0 otherwise; the ABX error is
the mean score.  Under unstructured representations the expected error is
exactly 0.5; a discriminative representation drives it toward 0.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import _kernels
from ..errors import DataError, TrialError
from ..layers import aggregate, check_weights
from ..store import ReprArchive
from .dtw import cosine_matrix
from .mining import SegmentRef, TripletSet


def _check_segment(archive: ReprArchive, ref: SegmentRef) -> None:
    rec = archive.record(ref.utt_id)
    if not (0 <= ref.start < ref.end <= rec.num_frames):
        raise TrialError(
            f"segment ({ref.start}, {ref.end}) of '{ref.utt_id}' is out of range "
            f"for T={rec.num_frames}"
        )


def _path_avg(a: np.ndarray, b: np.ndarray, kernel) -> float:
    sim = cosine_matrix(a, b)
    _, path = kernel.align(1.0 - sim)
    return float(np.mean(sim[path[:, 0], path[:, 1]]))


def abx_error(
    archive: ReprArchive,
    triplets: TripletSet,
    weights: np.ndarray,
    *,
    workers: int = 1,
    backend: str | None = None,
) -> float:
    """Fraction of triplets where X aligns closer to B than to A.

    Args:
        archive: source representations.
        triplets: non-empty mined triplet set.
        weights: length-L layer weights used to aggregate stacks.
        workers: thread count; results are independent of it.
        backend: kernel selection, None for the default.

    Returns:
        Error in [0, 1]; ties contribute 0.5.

    Raises:
        TrialError: empty set, or an unresolvable segment reference
            (reported with the 1-based triplet number).
    """
    if len(triplets) == 0:
        raise TrialError("triplet set is empty")
    w = check_weights(weights, num_layers=archive.num_layers)
    kernel = _kernels.get_backend(backend)

    # Validate every reference first so errors carry the triplet number.
    for number, t in enumerate(triplets, start=1):
        for ref in (t.a, t.b, t.x):
            try:
                _check_segment(archive, ref)
            except DataError as exc:
                raise TrialError(f"triplet {number}: {exc}") from exc

    # Aggregate each referenced utterance once; segments slice the result.
    referenced = sorted({ref.utt_id for t in triplets for ref in (t.a, t.b, t.x)})
    agg = {uid: aggregate(archive.record(uid).stack, w) for uid in referenced}

    def score(t) -> float:
        seg_a = agg[t.a.utt_id][t.a.start : t.a.end]
        seg_b = agg[t.b.utt_id][t.b.start : t.b.end]
        seg_x = agg[t.x.utt_id][t.x.start : t.x.end]
        s_xa = _path_avg(seg_x, seg_a, kernel)
        s_xb = _path_avg(seg_x, seg_b, kernel)
        if s_xb > s_xa:
            return 1.0
        if s_xb == s_xa:
            return 0.5
        return 0.0

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, triplets.triplets))
    else:
        scores = [score(t) for t in triplets]
    return float(np.mean(np.asarray(scores, dtype=np.float64)))
