"""Representation archives: the on-disk format and its data model.

An archive is a directory holding ``manifest.json`` plus one binary tensor
file per utterance under ``tensors/``.  Each tensor file stores a full
layer stack for one utterance:

    magic ``MP3SR\\0`` | u8 version=1 | u32 L | u32 T | u32 D | L*T*D float32

All integers and floats are little-endian; values are row-major ``[L][T][D]``.
Frames are produced at ``frame_rate_hz`` (50 by default, one frame per 20 ms).
Layer index 0 is the lowest level (convolutional front-end output).

Archives are immutable after load: stacks are frozen (read-only arrays) so
they can be shared freely across evaluation workers.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArchiveError

MAGIC = b"MP3SR\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<6sBIII")
_UTT_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")

Segment = tuple[int, int, str]


@dataclass
class UttRecord:
    """One utterance: a frozen [L, T, D] float32 stack plus metadata."""

    utt_id: str
    stack: np.ndarray
    speaker: str | None = None
    class_label: str | None = None
    segments: list[Segment] | None = None

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.stack, dtype=np.float32)
        if arr.ndim != 3:
            raise ArchiveError(
                f"utterance '{self.utt_id}': stack must be [L, T, D], got shape {arr.shape}"
            )
        L, T, D = arr.shape
        if L < 1 or T < 1 or D < 1:
            raise ArchiveError(
                f"utterance '{self.utt_id}': degenerate stack shape {arr.shape}"
            )
        if not np.isfinite(arr).all():
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ArchiveError(
                f"utterance '{self.utt_id}': non-finite value at "
                f"layer {bad[0]}, frame {bad[1]}, dim {bad[2]}"
            )
        if self.segments is not None:
            for start, end, label in self.segments:
                if not (0 <= start < end <= T):
                    raise ArchiveError(
                        f"utterance '{self.utt_id}': segment span ({start}, {end}, "
                        f"{label!r}) out of range for T={T}"
                    )
        arr.flags.writeable = False
        self.stack = arr

    @property
    def num_layers(self) -> int:
        return self.stack.shape[0]

    @property
    def num_frames(self) -> int:
        return self.stack.shape[1]

    @property
    def dim(self) -> int:
        return self.stack.shape[2]


@dataclass
class ReprArchive:
    """A validated collection of utterance records sharing L and D.

    ``num_layers`` and ``dim`` are derived from the records when present;
    an empty archive carries them explicitly (0 = unknown).
    """

    records: dict[str, UttRecord]
    encoder: str = "unknown"
    frame_rate_hz: float = 50.0
    num_layers: int = 0
    dim: int = 0

    def __post_init__(self) -> None:
        if self.frame_rate_hz <= 0:
            raise ArchiveError(f"frame_rate_hz must be positive, got {self.frame_rate_hz}")
        if not self.records:
            return
        first = next(iter(self.records.values()))
        if self.num_layers and self.num_layers != first.num_layers:
            raise ArchiveError(
                f"archive declares L={self.num_layers} but records hold L={first.num_layers}"
            )
        if self.dim and self.dim != first.dim:
            raise ArchiveError(
                f"archive declares D={self.dim} but records hold D={first.dim}"
            )
        self.num_layers, self.dim = first.num_layers, first.dim
        for utt_id, rec in self.records.items():
            if utt_id != rec.utt_id:
                raise ArchiveError(
                    f"record keyed '{utt_id}' carries utt_id '{rec.utt_id}'"
                )
            if rec.num_layers != self.num_layers or rec.dim != self.dim:
                raise ArchiveError(
                    f"utterance '{utt_id}': stack is L={rec.num_layers}, D={rec.dim} "
                    f"but archive is L={self.num_layers}, D={self.dim}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def record(self, utt_id: str) -> UttRecord:
        try:
            return self.records[utt_id]
        except KeyError:
            raise ArchiveError(f"unknown utterance '{utt_id}'") from None


def from_records(records: list[UttRecord], encoder: str = "synthetic",
                 frame_rate_hz: float = 50.0) -> ReprArchive:
    """Build an archive from records, checking utt_id uniqueness."""
    by_id: dict[str, UttRecord] = {}
    for rec in records:
        if rec.utt_id in by_id:
            raise ArchiveError(f"duplicate utt_id '{rec.utt_id}'")
        by_id[rec.utt_id] = rec
    return ReprArchive(records=by_id, encoder=encoder, frame_rate_hz=frame_rate_hz)


def segment_view(record: UttRecord, span: tuple[int, int]) -> np.ndarray:
    """Per-layer frame slice [start, end) of a record's stack.

    Returns a read-only [L, end-start, D] view; no data is copied.
    """
    start, end = span
    T = record.num_frames
    if not (0 <= start < end <= T):
        raise ArchiveError(
            f"utterance '{record.utt_id}': span ({start}, {end}) invalid for T={T}"
        )
    return record.stack[:, start:end, :]


def _tensor_bytes(stack: np.ndarray) -> bytes:
    L, T, D = stack.shape
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, L, T, D)
    return header + stack.astype("<f4", copy=False).tobytes(order="C")


def _decode_tensor(raw: bytes, utt_id: str) -> np.ndarray:
    if len(raw) < _HEADER.size:
        raise ArchiveError(f"utterance '{utt_id}': tensor file shorter than header")
    magic, version, L, T, D = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ArchiveError(f"utterance '{utt_id}': bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ArchiveError(f"utterance '{utt_id}': unsupported format version {version}")
    expected = _HEADER.size + 4 * L * T * D
    if len(raw) != expected:
        raise ArchiveError(
            f"utterance '{utt_id}': header declares L={L}, T={T}, D={D} "
            f"({expected} bytes) but file holds {len(raw)} bytes"
        )
    flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    return flat.reshape(L, T, D).copy()


def write_archive(archive: ReprArchive, path: str | Path) -> None:
    """Write an archive directory; byte-deterministic for identical input.

    An empty archive writes a manifest with an empty record list and no
    tensor files.  Records are emitted in sorted utt_id order with stable
    JSON key ordering, so two writes of the same archive produce identical
    bytes.
    """
    root = Path(path)
    # Validate everything up front: no partial archive is ever written.
    entries = sorted(archive.records.items())
    manifest_records: list[dict] = []
    for utt_id, rec in entries:
        if not _UTT_ID_RE.match(utt_id):
            raise ArchiveError(
                f"utterance '{utt_id}': utt_id must match {_UTT_ID_RE.pattern}"
            )
        entry: dict = {"utt_id": utt_id, "tensor": f"tensors/{utt_id}.mp3sr"}
        if rec.speaker is not None:
            entry["speaker"] = rec.speaker
        if rec.class_label is not None:
            entry["class_label"] = rec.class_label
        if rec.segments is not None:
            entry["segments"] = [[s, e, lab] for s, e, lab in rec.segments]
        manifest_records.append(entry)

    root.mkdir(parents=True, exist_ok=True)
    if entries:
        (root / "tensors").mkdir(exist_ok=True)
    for utt_id, rec in entries:
        (root / "tensors" / f"{utt_id}.mp3sr").write_bytes(_tensor_bytes(rec.stack))
    manifest = {
        "encoder": archive.encoder,
        "num_layers": archive.num_layers,
        "dim": archive.dim,
        "frame_rate_hz": archive.frame_rate_hz,
        "records": manifest_records,
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (root / "manifest.json").write_text(text, encoding="utf-8")


def load_manifest(path: str | Path) -> dict:
    """Read and structurally validate manifest.json (no tensor I/O)."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise ArchiveError(f"missing manifest: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArchiveError(f"manifest is not valid JSON: {exc}") from exc
    for key in ("encoder", "num_layers", "dim", "frame_rate_hz", "records"):
        if key not in manifest:
            raise ArchiveError(f"manifest missing field '{key}'")
    seen: set[str] = set()
    for entry in manifest["records"]:
        utt_id = entry.get("utt_id")
        if not utt_id:
            raise ArchiveError("manifest record without utt_id")
        if utt_id in seen:
            raise ArchiveError(f"duplicate utt_id '{utt_id}' in manifest")
        seen.add(utt_id)
        if "tensor" not in entry:
            raise ArchiveError(f"utterance '{utt_id}': manifest record missing 'tensor'")
    return manifest


def load_archive(path: str | Path) -> ReprArchive:
    """Load and fully validate an archive directory.

    Raises :class:`ArchiveError` naming the offending utterance for any
    shape mismatch, non-finite value, duplicate id, or missing file.
    """
    root = Path(path)
    manifest = load_manifest(root)
    records: dict[str, UttRecord] = {}
    for entry in manifest["records"]:
        utt_id = entry["utt_id"]
        tensor_path = root / entry["tensor"]
        if not tensor_path.is_file():
            raise ArchiveError(f"utterance '{utt_id}': missing tensor file {tensor_path}")
        stack = _decode_tensor(tensor_path.read_bytes(), utt_id)
        if stack.shape[0] != manifest["num_layers"] or stack.shape[2] != manifest["dim"]:
            raise ArchiveError(
                f"utterance '{utt_id}': tensor is L={stack.shape[0]}, D={stack.shape[2]} "
                f"but manifest declares L={manifest['num_layers']}, D={manifest['dim']}"
            )
        segments = entry.get("segments")
        if segments is not None:
            segments = [(int(s), int(e), str(lab)) for s, e, lab in segments]
        records[utt_id] = UttRecord(
            utt_id=utt_id,
            stack=stack,
            speaker=entry.get("speaker"),
            class_label=entry.get("class_label"),
            segments=segments,
        )
    return ReprArchive(
        records=records,
        encoder=manifest["encoder"],
        frame_rate_hz=float(manifest["frame_rate_hz"]),
        num_layers=int(manifest["num_layers"]),
        dim=int(manifest["dim"]),
    )
