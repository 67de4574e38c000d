"""Multiply-accumulate (MAC) accounting for declared architectures.

Architectures are declarative JSON specs — ordered layer lists — and the
cost of each layer kind is a documented closed form in exact integer
arithmetic.  Only multiply-accumulate pairs are counted: nonlinearities,
softmax, normalization, and biases count zero, matching the dominant-term
convention of common MAC-counting tools.

Closed forms (T = frame count):

* ``linear``            in_dim · out_dim, times T when ``per_frame``
* ``pooling``           0 (sums/divisions only)
* ``conv1d``            T · kernel · in_dim · out_dim
* ``bilstm``            2 directions · T · 4 gates · hidden · (in_dim + hidden)
* ``attention-block``   4 · T · dim² (Q, K, V, output projections)
                        + 2 · T² · dim (scores and weighted sum)
                        + 2 · T · dim · ffn (two feed-forward projections)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SpecError

LAYER_KINDS = ("linear", "pooling", "conv1d", "bilstm", "attention-block")

# Required integer parameters per kind (all must be >= 1).
_REQUIRED: dict[str, tuple[str, ...]] = {
    "linear": ("in_dim", "out_dim"),
    "pooling": (),
    "conv1d": ("in_dim", "out_dim", "kernel"),
    "bilstm": ("in_dim", "hidden"),
    "attention-block": ("dim", "ffn"),
}
# Optional parameters per kind.
_OPTIONAL: dict[str, tuple[str, ...]] = {
    "linear": ("per_frame",),
    "pooling": (),
    "conv1d": (),
    "bilstm": (),
    "attention-block": (),
}


@dataclass(frozen=True)
class LayerSpec:
    """One declared layer; see the module docstring for cost formulas."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in LAYER_KINDS:
            raise SpecError(f"unknown layer kind '{self.kind}' (choose from {LAYER_KINDS})")
        required = _REQUIRED[self.kind]
        allowed = set(required) | set(_OPTIONAL[self.kind])
        extra = sorted(set(self.params) - allowed)
        if extra:
            raise SpecError(f"{self.kind}: unexpected parameters {extra}")
        for name in required:
            if name not in self.params:
                raise SpecError(f"{self.kind}: missing required parameter '{name}'")
            value = self.params[name]
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise SpecError(
                    f"{self.kind}: parameter '{name}' must be a positive integer, "
                    f"got {value!r}"
                )
        if "per_frame" in self.params and not isinstance(self.params["per_frame"], bool):
            raise SpecError(f"{self.kind}: 'per_frame' must be a boolean")

    @property
    def in_features(self) -> int | None:
        """Input width for chain checking; None for pass-through layers."""
        if self.kind in ("linear", "conv1d", "bilstm"):
            return self.params["in_dim"]
        if self.kind == "attention-block":
            return self.params["dim"]
        return None

    @property
    def out_features(self) -> int | None:
        """Output width for chain checking; None for pass-through layers."""
        if self.kind in ("linear", "conv1d"):
            return self.params["out_dim"]
        if self.kind == "bilstm":
            return 2 * self.params["hidden"]
        if self.kind == "attention-block":
            return self.params["dim"]
        return None

    def macs(self, frames: int) -> int:
        """Exact MAC count for this layer at T = frames."""
        p = self.params
        if self.kind == "linear":
            base = p["in_dim"] * p["out_dim"]
            return base * frames if p.get("per_frame", False) else base
        if self.kind == "pooling":
            return 0
        if self.kind == "conv1d":
            return frames * p["kernel"] * p["in_dim"] * p["out_dim"]
        if self.kind == "bilstm":
            return 2 * frames * 4 * p["hidden"] * (p["in_dim"] + p["hidden"])
        dim, ffn = p["dim"], p["ffn"]
        return 4 * frames * dim * dim + 2 * frames * frames * dim + 2 * frames * dim * ffn


@dataclass(frozen=True)
class ArchSpec:
    """A named, dimension-chained sequence of layers."""

    name: str
    layers: tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        current: int | None = None
        for i, layer in enumerate(self.layers):
            expected = layer.in_features
            if current is not None and expected is not None and expected != current:
                raise SpecError(
                    f"{self.name}: layer {i} ({layer.kind}) expects {expected} input "
                    f"features but the previous layer produces {current}"
                )
            if layer.out_features is not None:
                current = layer.out_features

    @property
    def in_features(self) -> int | None:
        for layer in self.layers:
            if layer.in_features is not None:
                return layer.in_features
        return None

    @property
    def out_features(self) -> int | None:
        current = None
        for layer in self.layers:
            if layer.out_features is not None:
                current = layer.out_features
        return current


@dataclass(frozen=True)
class CostReport:
    """Per-layer MAC counts; total is always the exact sum."""

    total_macs: int
    per_layer: tuple[tuple[str, int], ...]
    frames: int
    subtotals: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if self.total_macs != sum(m for _, m in self.per_layer):
            raise SpecError("report total does not match the per-layer sum")
        if any(m < 0 for _, m in self.per_layer):
            raise SpecError("negative MAC count")


def probe_macs(spec: ArchSpec, frames: int) -> CostReport:
    """Exact MAC count of one architecture at T = frames."""
    if frames < 1:
        raise SpecError(f"frame count must be >= 1, got {frames}")
    per_layer = tuple(
        (f"{i}.{layer.kind}", layer.macs(frames)) for i, layer in enumerate(spec.layers)
    )
    return CostReport(
        total_macs=sum(m for _, m in per_layer), per_layer=per_layer, frames=frames
    )


def pipeline_macs(encoder: ArchSpec, probe: ArchSpec, frames: int) -> CostReport:
    """Combined encoder + probe cost with per-part subtotals.

    The probe's first declared input width must match the encoder's output
    width when both are known.
    """
    if (
        encoder.out_features is not None
        and probe.in_features is not None
        and encoder.out_features != probe.in_features
    ):
        raise SpecError(
            f"probe '{probe.name}' expects {probe.in_features} input features but "
            f"encoder '{encoder.name}' produces {encoder.out_features}"
        )
    enc = probe_macs(encoder, frames)
    prb = probe_macs(probe, frames)
    per_layer = tuple(
        [(f"encoder.{name}", m) for name, m in enc.per_layer]
        + [(f"probe.{name}", m) for name, m in prb.per_layer]
    )
    return CostReport(
        total_macs=enc.total_macs + prb.total_macs,
        per_layer=per_layer,
        frames=frames,
        subtotals=(("encoder", enc.total_macs), ("probe", prb.total_macs)),
    )


def archspec_from_dict(data: dict) -> ArchSpec:
    """Build an ArchSpec from its JSON dict form."""
    if not isinstance(data, dict) or "name" not in data or "layers" not in data:
        raise SpecError("architecture spec must be an object with 'name' and 'layers'")
    layers = []
    for entry in data["layers"]:
        if not isinstance(entry, dict) or "kind" not in entry:
            raise SpecError(f"layer entry must be an object with 'kind', got {entry!r}")
        params = {k: v for k, v in entry.items() if k != "kind"}
        layers.append(LayerSpec(kind=entry["kind"], params=params))
    return ArchSpec(name=str(data["name"]), layers=tuple(layers))


def archspec_to_dict(spec: ArchSpec) -> dict:
    """Inverse of :func:`archspec_from_dict`."""
    return {
        "name": spec.name,
        "layers": [{"kind": layer.kind, **layer.params} for layer in spec.layers],
    }


def load_archspec(path: str | Path) -> ArchSpec:
    """Load an architecture spec from a JSON file."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecError(f"cannot read architecture spec: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: not valid JSON: {exc}") from exc
    return archspec_from_dict(data)


def save_archspec(spec: ArchSpec, path: str | Path) -> None:
    """Write an architecture spec as JSON."""
    text = json.dumps(archspec_to_dict(spec), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")
