"""Minimal probing head: time-mean pooling followed by a linear classifier.

The probe consumes [L, T, D] stacks.  Each stack is mean-pooled over time to
[L, D]; layer weights W = softmax(P) collapse that to a single D-vector; a
linear classifier with softmax cross-entropy produces class scores.  The
layer logits P are trained jointly with the classifier by full-batch
gradient descent — unless a frozen weight vector is supplied, in which case
the combination is constant and only the classifier trains (a convex
problem).

Everything is deterministic: parameters initialize at zero (uniform layer
weights), there is no mini-batching, and the returned parameters are those
of the best validation epoch.  The training seed is recorded for
provenance even though the regime draws no random numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ProbeError
from .layers import check_weights, softmax_weights
from .store import ReprArchive


@dataclass(frozen=True)
class ProbeConfig:
    """Training hyperparameters.

    Attributes:
        learning_rate: gradient-descent step size (> 0).
        max_epochs: full-batch epochs to run (≥ 1).
        early_stop_patience: stop after this many epochs without validation
            improvement; 0 disables early stopping.
        seed: recorded with the probe for provenance.
        frozen_weights: fixed layer weights; None trains them jointly.
    """

    learning_rate: float = 0.5
    max_epochs: int = 200
    early_stop_patience: int = 0
    seed: int = 42
    frozen_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ProbeError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise ProbeError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.early_stop_patience < 0:
            raise ProbeError(
                f"early_stop_patience must be >= 0, got {self.early_stop_patience}"
            )
        if self.frozen_weights is not None:
            check_weights(np.asarray(self.frozen_weights, dtype=np.float64))


def pool_features(
    archive: ReprArchive, classes: list[str] | None = None
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Time-mean pool every record of a labeled archive.

    Args:
        archive: archive whose records all carry class_label.
        classes: label universe; None derives it (sorted) from the archive.

    Returns:
        (features [N, L, D] float64, labels [N] int, classes) with records
        in sorted utt_id order.
    """
    utt_ids = sorted(archive.records)
    if not utt_ids:
        raise ProbeError("archive holds no records")
    found: list[str] = []
    for uid in utt_ids:
        label = archive.records[uid].class_label
        if label is None:
            raise ProbeError(f"utterance '{uid}' has no class_label")
        found.append(label)
    if classes is None:
        classes = sorted(set(found))
    index = {c: i for i, c in enumerate(classes)}
    unknown = sorted(set(found) - set(classes))
    if unknown:
        raise ProbeError(f"labels {unknown} not in known classes {classes}")
    feats = np.stack(
        [archive.records[uid].stack.mean(axis=1, dtype=np.float64) for uid in utt_ids]
    )
    labels = np.asarray([index[lab] for lab in found], dtype=np.int64)
    return feats, labels, list(classes)


@dataclass
class TrainedProbe:
    """Trained classifier, layer weighting, and training history."""

    classifier: np.ndarray
    bias: np.ndarray
    layer_logits: np.ndarray
    classes: list[str]
    config: ProbeConfig
    frozen_weights: np.ndarray | None = None
    history: dict = field(default_factory=dict)

    @property
    def layer_weights(self) -> np.ndarray:
        """Effective layer weights: frozen vector or softmax of the logits."""
        if self.frozen_weights is not None:
            return self.frozen_weights
        return softmax_weights(self.layer_logits)

    def logit_scores(self, feats: np.ndarray) -> np.ndarray:
        """Class scores [N, C] for pooled features [N, L, D]."""
        x = np.einsum("l,nld->nd", self.layer_weights, feats)
        return x @ self.classifier + self.bias

    def predict(self, feats: np.ndarray) -> np.ndarray:
        """Argmax class indices for pooled features."""
        return np.argmax(self.logit_scores(feats), axis=1)


def _loss_and_grads(
    classifier: np.ndarray,
    bias: np.ndarray,
    layer_logits: np.ndarray,
    frozen: np.ndarray | None,
    feats: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean cross-entropy and analytic gradients for all parameters.

    Returns (loss, d_classifier, d_bias, d_layer_logits); the logits
    gradient is zero in frozen mode.
    """
    n = feats.shape[0]
    weights = frozen if frozen is not None else softmax_weights(layer_logits)
    x = np.einsum("l,nld->nd", weights, feats)
    z = x @ classifier + bias
    z_shift = z - z.max(axis=1, keepdims=True)
    exp_z = np.exp(z_shift)
    probs = exp_z / exp_z.sum(axis=1, keepdims=True)
    log_probs = z_shift - np.log(exp_z.sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(n), labels].mean())

    d_z = probs.copy()
    d_z[np.arange(n), labels] -= 1.0
    d_z /= n
    d_classifier = x.T @ d_z
    d_bias = d_z.sum(axis=0)
    if frozen is not None:
        d_logits = np.zeros_like(layer_logits)
    else:
        d_x = d_z @ classifier.T
        d_weights = np.einsum("nld,nd->l", feats, d_x)
        d_logits = weights * (d_weights - np.dot(weights, d_weights))
    return loss, d_classifier, d_bias, d_logits


def train_probe(
    train: ReprArchive, valid: ReprArchive, cfg: ProbeConfig
) -> TrainedProbe:
    """Full-batch gradient descent returning the best-validation parameters.

    Args:
        train: labeled training archive (≥ 2 classes).
        valid: labeled validation archive over the same label universe.
        cfg: hyperparameters; cfg.frozen_weights freezes the layer combination.

    Raises:
        ProbeError: single-class training set, shape mismatch, unknown
            validation label, or a non-finite loss (reported with epoch).
    """
    feats, labels, classes = pool_features(train)
    if len(classes) < 2:
        raise ProbeError(f"training needs >= 2 classes, found {classes}")
    if train.num_layers != valid.num_layers or train.dim != valid.dim:
        raise ProbeError(
            f"train archive is L={train.num_layers}, D={train.dim} but valid is "
            f"L={valid.num_layers}, D={valid.dim}"
        )
    val_feats, val_labels, _ = pool_features(valid, classes)

    num_layers, dim = feats.shape[1], feats.shape[2]
    frozen = None
    if cfg.frozen_weights is not None:
        frozen = check_weights(
            np.asarray(cfg.frozen_weights, dtype=np.float64), num_layers=num_layers
        )
    classifier = np.zeros((dim, len(classes)))
    bias = np.zeros(len(classes))
    layer_logits = np.zeros(num_layers)

    best = (np.inf, classifier.copy(), bias.copy(), layer_logits.copy(), 0)
    train_losses: list[float] = []
    val_losses: list[float] = []
    since_best = 0
    for epoch in range(1, cfg.max_epochs + 1):
        loss, d_c, d_b, d_p = _loss_and_grads(
            classifier, bias, layer_logits, frozen, feats, labels
        )
        if not np.isfinite(loss):
            raise ProbeError(f"non-finite training loss at epoch {epoch}")
        classifier -= cfg.learning_rate * d_c
        bias -= cfg.learning_rate * d_b
        if frozen is None:
            layer_logits -= cfg.learning_rate * d_p
        val_loss, _, _, _ = _loss_and_grads(
            classifier, bias, layer_logits, frozen, val_feats, val_labels
        )
        if not np.isfinite(val_loss):
            raise ProbeError(f"non-finite validation loss at epoch {epoch}")
        train_losses.append(loss)
        val_losses.append(val_loss)
        if val_loss < best[0]:
            best = (val_loss, classifier.copy(), bias.copy(), layer_logits.copy(), epoch)
            since_best = 0
        else:
            since_best += 1
            if cfg.early_stop_patience and since_best >= cfg.early_stop_patience:
                break

    return TrainedProbe(
        classifier=best[1],
        bias=best[2],
        layer_logits=best[3],
        classes=classes,
        config=cfg,
        frozen_weights=frozen,
        history={
            "train_loss": train_losses,
            "val_loss": val_losses,
            "best_epoch": best[4],
            "best_val_loss": best[0],
        },
    )


def probe_gradients(
    probe: TrainedProbe, feats: np.ndarray, labels: np.ndarray
) -> dict[str, np.ndarray]:
    """Analytic training-loss gradients at the probe's current parameters.

    Args:
        probe: trained (or hand-built) probe.
        feats: pooled batch [N, L, D], N ≥ 1.
        labels: class indices [N].

    Returns:
        {"classifier": [D, C], "bias": [C], "layer_logits": [L]}; the
        layer_logits entry is exactly zero in frozen mode.
    """
    if feats.ndim != 3 or feats.shape[0] == 0:
        raise ProbeError(f"batch must be non-empty [N, L, D], got shape {feats.shape}")
    _, d_c, d_b, d_p = _loss_and_grads(
        probe.classifier,
        probe.bias,
        probe.layer_logits,
        probe.frozen_weights,
        np.asarray(feats, dtype=np.float64),
        np.asarray(labels, dtype=np.int64),
    )
    return {"classifier": d_c, "bias": d_b, "layer_logits": d_p}


def evaluate_probe(probe: TrainedProbe, test: ReprArchive) -> float:
    """Fraction of test records whose argmax prediction matches the label."""
    feats, labels, _ = pool_features(test, probe.classes)
    return float(np.mean(probe.predict(feats) == labels))


def probe_to_dict(probe: TrainedProbe) -> dict:
    """JSON-ready dict: parameters as nested lists, config and seed embedded."""
    cfg = probe.config
    return {
        "classifier": probe.classifier.tolist(),
        "bias": probe.bias.tolist(),
        "layer_logits": probe.layer_logits.tolist(),
        "layer_weights": probe.layer_weights.tolist(),
        "classes": probe.classes,
        "frozen_weights": None
        if probe.frozen_weights is None
        else probe.frozen_weights.tolist(),
        "config": {
            "learning_rate": cfg.learning_rate,
            "max_epochs": cfg.max_epochs,
            "early_stop_patience": cfg.early_stop_patience,
            "seed": cfg.seed,
        },
        "history": probe.history,
    }


def save_probe(probe: TrainedProbe, path: str | Path) -> None:
    """Serialize a probe as JSON."""
    text = json.dumps(probe_to_dict(probe), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_probe(path: str | Path) -> TrainedProbe:
    """Load a probe serialized by :func:`save_probe`."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProbeError(f"cannot read probe file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProbeError(f"{path}: not valid JSON: {exc}") from exc
    try:
        frozen = data["frozen_weights"]
        cfg = ProbeConfig(
            learning_rate=data["config"]["learning_rate"],
            max_epochs=data["config"]["max_epochs"],
            early_stop_patience=data["config"]["early_stop_patience"],
            seed=data["config"]["seed"],
            frozen_weights=None if frozen is None else tuple(frozen),
        )
        return TrainedProbe(
            classifier=np.asarray(data["classifier"], dtype=np.float64),
            bias=np.asarray(data["bias"], dtype=np.float64),
            layer_logits=np.asarray(data["layer_logits"], dtype=np.float64),
            classes=list(data["classes"]),
            config=cfg,
            frozen_weights=None if frozen is None else np.asarray(frozen, dtype=np.float64),
            history=data.get("history", {}),
        )
    except KeyError as exc:
        raise ProbeError(f"{path}: probe file missing field {exc}") from exc
