"""AX verification: trial scoring and equal error rate.

A trial compares two whole utterances; the score is the DTW path-average
cosine similarity of their aggregated representations.  Unless the caller
supplies layer weights, aggregation uses the depth-decay scheme with
decay 0.2, which favours early layers.

The equal error rate sweeps a decision threshold τ over the midpoints of
consecutive sorted unique scores (plus one threshold below the minimum and
one above the maximum).  At each τ, FAR is the fraction of different-source
trials scoring ≥ τ and FRR the fraction of same-source trials scoring < τ;
the EER is (FAR + FRR) / 2 at the τ minimizing |FAR − FRR|, taking the
smallest such τ on ties.  Because only score ranks matter, the EER is
invariant under any strictly increasing transform of the scores.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import _kernels
from ..errors import DataError, TrialError
from ..layers import aggregate, check_weights, decay_weights
from ..store import ReprArchive
from .dtw import cosine_matrix


@dataclass(frozen=True)
class Trial:
    """A same/different decision item over two distinct utterances."""

    enroll: str
    test: str
    same_source: bool

    def __post_init__(self) -> None:
        if self.enroll == self.test:
            raise TrialError(f"trial compares '{self.enroll}' with itself")


@dataclass(frozen=True)
class ScoredTrials:
    """Trials with their similarity scores, in input order."""

    trials: tuple[Trial, ...]
    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.trials) != len(self.scores):
            raise TrialError("trials and scores must have equal length")
        if not all(np.isfinite(self.scores)):
            raise TrialError("trial scores must be finite")

    def __len__(self) -> int:
        return len(self.trials)


def read_trials(path: str | Path) -> list[Trial]:
    """Parse a trial file of lines ``label enroll_utt test_utt``, label ∈ {0,1}."""
    trials: list[Trial] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TrialError(f"cannot read trial file: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3 or fields[0] not in ("0", "1"):
            raise TrialError(
                f"{path}: line {lineno}: expected 'label enroll test' with label 0 or 1"
            )
        trials.append(Trial(enroll=fields[1], test=fields[2], same_source=fields[0] == "1"))
    if not trials:
        raise TrialError(f"{path}: no trials found")
    return trials


def write_trials(trials: list[Trial], path: str | Path) -> None:
    """Write trials in the ``label enroll_utt test_utt`` line format."""
    lines = [f"{int(t.same_source)} {t.enroll} {t.test}" for t in trials]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def score_trials(
    archive: ReprArchive,
    trials: list[Trial],
    weights: np.ndarray | None = None,
    *,
    workers: int = 1,
    backend: str | None = None,
) -> ScoredTrials:
    """Score each trial with path-average similarity of aggregated stacks.

    Args:
        archive: source representations.
        trials: non-empty trial list referencing archive utterances.
        weights: length-L layer weights; None uses decay_weights(L, 0.2).
        workers: thread count; results are independent of it.
        backend: kernel selection, None for the default.
    """
    if not trials:
        raise TrialError("trial list is empty")
    if weights is None:
        weights = decay_weights(archive.num_layers, 0.2)
    w = check_weights(weights, num_layers=archive.num_layers)
    kernel = _kernels.get_backend(backend)
    # Validate every reference first so errors carry the trial number.
    for number, t in enumerate(trials, start=1):
        for uid in (t.enroll, t.test):
            try:
                archive.record(uid)
            except DataError as exc:
                raise TrialError(f"trial {number}: {exc}") from exc
    referenced = sorted({u for t in trials for u in (t.enroll, t.test)})
    agg = {uid: aggregate(archive.record(uid).stack, w) for uid in referenced}

    def score(t: Trial) -> float:
        sim = cosine_matrix(agg[t.enroll], agg[t.test])
        _, path = kernel.align(1.0 - sim)
        return float(np.mean(sim[path[:, 0], path[:, 1]]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = tuple(pool.map(score, trials))
    else:
        scores = tuple(score(t) for t in trials)
    return ScoredTrials(trials=tuple(trials), scores=scores)


def compute_eer(scored: ScoredTrials) -> tuple[float, float]:
    """Equal error rate and its threshold from scored trials.

    Args:
        scored: trials with at least one same-source and one
            different-source entry.

    Returns:
        (eer, tau): error rate in [0, 1] and the decision threshold.
    """
    scores = np.asarray(scored.scores, dtype=np.float64)
    labels = np.asarray([t.same_source for t in scored.trials], dtype=bool)
    positives = scores[labels]
    negatives = scores[~labels]
    if positives.size == 0 or negatives.size == 0:
        raise TrialError("EER needs at least one same-source and one different-source trial")

    uniq = np.unique(scores)
    candidates = np.concatenate(([uniq[0] - 1.0], (uniq[:-1] + uniq[1:]) / 2.0, [uniq[-1] + 1.0]))
    best: tuple[float, float, float] | None = None
    for tau in candidates:
        far = float(np.mean(negatives >= tau))
        frr = float(np.mean(positives < tau))
        gap = abs(far - frr)
        if best is None or gap < best[0]:
            best = (gap, float(tau), (far + frr) / 2.0)
    assert best is not None
    return best[2], best[1]
