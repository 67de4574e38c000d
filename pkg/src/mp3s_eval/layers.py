"""Layer weighting and aggregation for multi-layer representation stacks.

A stack holds L per-layer frame matrices; downstream consumers want a single
[T, D] matrix.  This module provides the two weighting schemes used across
the toolkit — learned softmax weights ``W = softmax(P)`` and the fixed
depth-decay scheme ``softmax((exp(-decay * i))_{i=1..L})`` — plus the
weighted sum itself.

Layer index convention: i = 1 is the lowest layer (the convolutional
front-end output) and i = L the deepest.  The decay scheme therefore puts
strictly more mass on early layers whenever ``decay > 0``.

All functions are pure and compute in double precision regardless of input
dtype, so weight sums are reliable at 1e-6 tolerance.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError

WEIGHT_SUM_TOL = 1e-6


def softmax_weights(logits: np.ndarray) -> np.ndarray:
    """Map unconstrained logits P to weights W = softmax(P).

    Uses max-subtraction, so arbitrarily large finite logits cannot
    overflow.

    Args:
        logits: length-L array of finite reals.

    Returns:
        Length-L float64 array of non-negative weights summing to 1.
    """
    p = np.asarray(logits, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"logits must be a non-empty 1-D vector, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("logits must be finite")
    shifted = np.exp(p - p.max())
    return shifted / shifted.sum()


def decay_weights(num_layers: int, decay: float = 0.2) -> np.ndarray:
    """Fixed layer weights favouring early layers.

    Computes ``softmax((exp(-decay * i))_{i=1..num_layers})``: the softmax
    logits themselves decay exponentially with depth, so the weights
    strictly decrease with layer index for ``decay > 0`` and are uniform at
    ``decay = 0``.

    Args:
        num_layers: L ≥ 1.
        decay: non-negative decay rate (0.2 unless stated otherwise).

    Returns:
        Length-L float64 array, non-increasing, summing to 1.
    """
    if num_layers < 1:
        raise ValueError(f"num_layers must be >= 1, got {num_layers}")
    if decay < 0:
        raise ValueError(f"decay must be >= 0, got {decay}")
    idx = np.arange(1, num_layers + 1, dtype=np.float64)
    return softmax_weights(np.exp(-decay * idx))


def check_weights(weights: np.ndarray, num_layers: int | None = None) -> np.ndarray:
    """Validate a weight vector: non-negative, sums to 1 within 1e-6.

    Args:
        weights: candidate length-L vector.
        num_layers: if given, additionally require len(weights) == num_layers.

    Returns:
        The validated vector as float64.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"weights must be a non-empty 1-D vector, got shape {w.shape}")
    if num_layers is not None and w.size != num_layers:
        raise ValueError(f"expected {num_layers} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {w.sum()!r}")
    return w


def aggregate(stack: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Collapse an [L, T, D] stack to the weighted sum Σ_i w_i · layer_i.

    Args:
        stack: [L, T, D] array.
        weights: length-L weight vector (validated).

    Returns:
        [T, D] float64 matrix.
    """
    s = np.asarray(stack)
    if s.ndim != 3:
        raise ValueError(f"stack must be [L, T, D], got shape {s.shape}")
    w = check_weights(weights, num_layers=s.shape[0])
    return np.tensordot(w, s.astype(np.float64, copy=False), axes=(0, 0))


def save_weights(weights: np.ndarray, path: str | Path) -> None:
    """Write a weight vector as a JSON array (full float64 precision)."""
    w = check_weights(weights)
    Path(path).write_text(json.dumps(w.tolist()) + "\n", encoding="utf-8")


def load_weights(path: str | Path, num_layers: int | None = None) -> np.ndarray:
    """Read and validate a JSON-array weight vector.

    Raises:
        DataError: unreadable file, malformed JSON, or weights failing
            validation (a bad weight *file* is bad input data, unlike the
            programmatic misuse ValueErrors raised elsewhere here).
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read weight file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a JSON array of weights")
    try:
        return check_weights(np.asarray(data, dtype=np.float64), num_layers=num_layers)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
