"""Shared builders for synthetic archives and records."""

from __future__ import annotations

import numpy as np
import pytest

from mp3s_eval.store import ReprArchive, UttRecord, from_records


def make_record(
    utt_id: str = "utt0",
    num_layers: int = 2,
    num_frames: int = 5,
    dim: int = 4,
    seed: int = 0,
    **kwargs,
) -> UttRecord:
    rng = np.random.default_rng(seed)
    stack = rng.normal(size=(num_layers, num_frames, dim)).astype(np.float32)
    return UttRecord(utt_id=utt_id, stack=stack, **kwargs)


def make_class_archive(
    classes: tuple[str, ...] = ("a", "i", "u"),
    speakers: tuple[str, ...] = ("s1", "s2"),
    reps: int = 2,
    num_layers: int = 3,
    num_frames: int = 12,
    dim: int = 8,
    noise: float = 0.2,
    seed: int = 7,
    segment_span: tuple[int, int] = (2, 9),
    trigram_labels: bool = True,
    centers_seed: int | None = None,
) -> ReprArchive:
    """Clustered archive: one Gaussian centre per class, shared across layers.

    Each record carries one segment labelled either ``x-<class>-y`` (trigram
    form, so mining can context-match) or ``<class>``.  Pass the same
    ``centers_seed`` to several calls to build train/valid/test splits that
    share class geometry while drawing independent noise.
    """
    rng = np.random.default_rng(seed)
    centers_rng = rng if centers_seed is None else np.random.default_rng(centers_seed)
    centers = {c: centers_rng.normal(size=dim) for c in classes}
    records = []
    idx = 0
    for spk in speakers:
        for cls in classes:
            for _ in range(reps):
                stack = rng.normal(scale=noise, size=(num_layers, num_frames, dim))
                stack += centers[cls]
                label = f"x-{cls}-y" if trigram_labels else cls
                start, end = segment_span
                records.append(
                    UttRecord(
                        utt_id=f"utt{idx:03d}",
                        stack=stack.astype(np.float32),
                        speaker=spk,
                        class_label=cls,
                        segments=[(start, end, label)],
                    )
                )
                idx += 1
    return from_records(records, encoder="synthetic", frame_rate_hz=50.0)


@pytest.fixture
def class_archive() -> ReprArchive:
    return make_class_archive()
