"""Deterministic mining of ABX triplets from labeled segment spans.

A triplet (A, B, X) pairs two segments A and X that share a full segment
label (but are distinct segments) with a contrast segment B:

* when the shared label has the three-part shape ``left-center-right``
  (e.g. a phone trigram), B must match A's left/right context and differ
  in the center part;
* otherwise B is any segment with a different label.

Both (A, X) orders are mined.  An optional within-speaker constraint
requires A, B, and X to share one speaker.  When a per-label-pair cap is
set, each (label_ax, label_b) group larger than the cap is downsampled
uniformly without replacement with a seeded generator, so the mined set is
a pure function of (manifest, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..errors import MiningError


class SegmentRef(NamedTuple):
    """A labeled span of an utterance: frames [start, end) of utt_id."""

    utt_id: str
    start: int
    end: int
    label: str
    speaker: str | None = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


class Triplet(NamedTuple):
    """An ABX item: X shares A's label; B carries a different label."""

    a: SegmentRef
    b: SegmentRef
    x: SegmentRef
    label_ax: str
    label_b: str


@dataclass(frozen=True)
class MiningConfig:
    """Mining options.

    Attributes:
        per_label_cap: maximum triplets kept per (label_ax, label_b) pair;
            None keeps all.
        within_speaker: require A, B, X to share a speaker.
    """

    per_label_cap: int | None = None
    within_speaker: bool = False

    def __post_init__(self) -> None:
        if self.per_label_cap is not None and self.per_label_cap < 1:
            raise MiningError(f"per_label_cap must be >= 1, got {self.per_label_cap}")


@dataclass(frozen=True)
class TripletSet:
    """Mined triplets plus the config and seed that reproduce them."""

    triplets: tuple[Triplet, ...]
    mining_seed: int
    config: MiningConfig = field(default_factory=MiningConfig)

    def __len__(self) -> int:
        return len(self.triplets)

    def __iter__(self):
        return iter(self.triplets)


def _context(label: str) -> tuple[str, str, str] | None:
    """Split ``left-center-right`` labels; None when not three-part."""
    parts = label.split("-")
    if len(parts) == 3 and all(parts):
        return parts[0], parts[1], parts[2]
    return None


def _collect_segments(manifest: dict) -> list[SegmentRef]:
    segments: list[SegmentRef] = []
    for entry in manifest["records"]:
        for start, end, label in entry.get("segments") or []:
            segments.append(
                SegmentRef(
                    utt_id=entry["utt_id"],
                    start=int(start),
                    end=int(end),
                    label=str(label),
                    speaker=entry.get("speaker"),
                )
            )
    return segments


def mine_triplets(manifest: dict, config: MiningConfig, seed: int) -> TripletSet:
    """Mine every admissible triplet, then apply the per-pair cap.

    Args:
        manifest: archive manifest dict (tensors are not touched).
        config: mining options.
        seed: RNG seed for cap downsampling; recorded in the result.

    Returns:
        TripletSet in a canonical deterministic order.

    Raises:
        MiningError: no labeled segments, or no constructible triplet.
    """
    segments = sorted(set(_collect_segments(manifest)))
    if not segments:
        raise MiningError("archive has no labeled segments to mine from")

    by_label: dict[str, list[SegmentRef]] = {}
    for seg in segments:
        by_label.setdefault(seg.label, []).append(seg)
    if len(by_label) < 2:
        raise MiningError(
            f"mining needs at least two distinct labels, found {len(by_label)}"
        )

    groups: dict[tuple[str, str], list[Triplet]] = {}
    for label_ax in sorted(by_label):
        pool = by_label[label_ax]
        if len(pool) < 2:
            continue
        ctx = _context(label_ax)
        if ctx is not None:
            left, center, right = ctx
            contrasts = [
                s
                for s in segments
                if (c := _context(s.label)) is not None
                and c[0] == left
                and c[2] == right
                and c[1] != center
            ]
        else:
            contrasts = [s for s in segments if s.label != label_ax]
        if not contrasts:
            continue
        for a in pool:
            for x in pool:
                if a == x:
                    continue
                for b in contrasts:
                    if config.within_speaker and not (
                        a.speaker is not None and a.speaker == x.speaker == b.speaker
                    ):
                        continue
                    groups.setdefault((label_ax, b.label), []).append(
                        Triplet(a=a, b=b, x=x, label_ax=label_ax, label_b=b.label)
                    )

    rng = np.random.default_rng(seed)
    kept: list[Triplet] = []
    for key in sorted(groups):
        candidates = groups[key]
        if config.per_label_cap is not None and len(candidates) > config.per_label_cap:
            idx = rng.choice(len(candidates), size=config.per_label_cap, replace=False)
            candidates = [candidates[i] for i in sorted(idx)]
        kept.extend(candidates)
    if not kept:
        raise MiningError("no admissible triplet could be constructed")
    kept.sort()
    return TripletSet(triplets=tuple(kept), mining_seed=seed, config=config)


_TSV_COLUMNS = (
    "a_utt",
    "a_start",
    "a_end",
    "b_utt",
    "b_start",
    "b_end",
    "x_utt",
    "x_start",
    "x_end",
    "label_ax",
    "label_b",
)


def write_triplets(triplets: TripletSet, path: str | Path) -> None:
    """Write triplets as a TSV file with a header row."""
    lines = ["\t".join(_TSV_COLUMNS)]
    for t in triplets:
        lines.append(
            "\t".join(
                str(v)
                for v in (
                    t.a.utt_id, t.a.start, t.a.end,
                    t.b.utt_id, t.b.start, t.b.end,
                    t.x.utt_id, t.x.start, t.x.end,
                    t.label_ax, t.label_b,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_triplets(path: str | Path, *, seed: int = 0) -> TripletSet:
    """Read a triplet TSV (header optional); speakers are not stored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MiningError(f"cannot read triplet file: {exc}") from exc
    triplets: list[Triplet] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or (lineno == 1 and line.split("\t")[0] == "a_utt"):
            continue
        fields = line.split("\t")
        if len(fields) != len(_TSV_COLUMNS):
            raise MiningError(
                f"{path}: line {lineno}: expected {len(_TSV_COLUMNS)} tab-separated "
                f"fields, got {len(fields)}"
            )
        try:
            a = SegmentRef(fields[0], int(fields[1]), int(fields[2]), fields[9])
            b = SegmentRef(fields[3], int(fields[4]), int(fields[5]), fields[10])
            x = SegmentRef(fields[6], int(fields[7]), int(fields[8]), fields[9])
        except ValueError as exc:
            raise MiningError(f"{path}: line {lineno}: {exc}") from exc
        if fields[9] == fields[10]:
            raise MiningError(
                f"{path}: line {lineno}: label_ax and label_b must differ"
            )
        triplets.append(Triplet(a=a, b=b, x=x, label_ax=fields[9], label_b=fields[10]))
    if not triplets:
        raise MiningError(f"{path}: no triplets found")
    return TripletSet(triplets=tuple(triplets), mining_seed=seed)
