"""Evaluation of representations without any trained downstream head.

Submodules:

* ``dtw`` — frame cosine similarity and DTW sequence alignment.
* ``mining`` — deterministic ABX triplet mining from labeled segments.
* ``abx`` — ABX discriminability error over mined triplets.
* ``verification`` — AX trial scoring and equal-error-rate computation.
"""

from .abx import abx_error
from .dtw import Alignment, cosine_matrix, dtw_align, frame_cosine, path_avg_similarity
from .mining import MiningConfig, SegmentRef, Triplet, TripletSet, mine_triplets
from .verification import ScoredTrials, Trial, compute_eer, score_trials

__all__ = [
    "Alignment",
    "MiningConfig",
    "ScoredTrials",
    "SegmentRef",
    "Trial",
    "Triplet",
    "TripletSet",
    "abx_error",
    "compute_eer",
    "cosine_matrix",
    "dtw_align",
    "frame_cosine",
    "mine_triplets",
    "path_avg_similarity",
    "score_trials",
]
