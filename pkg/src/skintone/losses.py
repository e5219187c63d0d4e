"""Classification losses: plain, weighted, ordinal, and weighted ordinal CE.

The ordinal variants scale the cross-entropy of each sample by
1 + (pred - true)^2 / C with C = 10 classes, so mistakes far from the true
tone cost more than near misses. The discrete prediction is the argmax of the
current logits and is treated as a constant in the gradient.
"""

from dataclasses import dataclass

import numpy as np

from .metrics import N_CLASSES

LOSS_KINDS = ("CE", "WEIGHTED_CE", "ORDINAL_CE", "WEIGHTED_ORDINAL_CE")


@dataclass(frozen=True)
class LossConfig:
    kind: str = "CE"
    class_weights: tuple | None = None  # len 10; None = inverse frequency at fit time
    n_classes: int = N_CLASSES

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"loss kind must be one of {LOSS_KINDS}, got {self.kind!r}")
        if self.class_weights is not None:
            weights = tuple(float(w) for w in self.class_weights)
            if len(weights) != self.n_classes or any(w <= 0 for w in weights):
                raise ValueError("class_weights must be 10 positive values")
            object.__setattr__(self, "class_weights", weights)

    @property
    def weighted(self):
        return self.kind.startswith("WEIGHTED")

    @property
    def ordinal(self):
        return "ORDINAL" in self.kind

    def to_dict(self):
        return {"kind": self.kind,
                "class_weights": list(self.class_weights) if self.class_weights else None}

    @classmethod
    def from_dict(cls, obj):
        weights = obj.get("class_weights")
        return cls(kind=obj["kind"],
                   class_weights=tuple(weights) if weights else None)


def inverse_frequency_weights(y):
    """Per-class weights proportional to 1/count, normalized to mean 1.

    Classes absent from y get weight 1 (they never contribute to the loss).
    """
    y = np.asarray(y, dtype=int)
    counts = np.bincount(y - 1, minlength=N_CLASSES).astype(np.float64)
    present = counts > 0
    weights = np.ones(N_CLASSES)
    inv = 1.0 / counts[present]
    weights[present] = inv / inv.mean()
    return weights


def softmax(logits):
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def ordinal_multiplier(pred_label, true_label, n_classes=N_CLASSES):
    """1 + (pred - true)^2 / C; equals 1 when the prediction is exact."""
    return 1.0 + (float(pred_label) - float(true_label)) ** 2 / n_classes


def loss(logits, target, cfg=LossConfig(), weights=None):
    """Loss value and gradient w.r.t. the logits for a single sample.

    target is an MST label in 1..10. The gradient is
    m * w * (softmax(logits) - onehot(target)) where m is the ordinal
    multiplier (1 for non-ordinal kinds) and w the target's class weight
    (1 for unweighted kinds).
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.shape != (cfg.n_classes,):
        raise ValueError(f"expected {cfg.n_classes} logits, got shape {logits.shape}")
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logits")
    target = int(target)
    values, grads = batch_loss(logits[None, :], np.array([target]), cfg, weights)
    return float(values[0]), grads[0]


def batch_loss(logits, targets, cfg=LossConfig(), weights=None):
    """Vectorized per-sample loss values and gradients.

    Returns (values (N,), grad (N, 10)); the caller averages as needed.
    """
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=int)
    if not np.all(np.isfinite(logits)):
        raise ValueError("non-finite logits")
    n = logits.shape[0]
    idx = targets - 1

    probs = softmax(logits)
    # Clip only the picked log argument; probabilities stay untouched for grads.
    picked = np.clip(probs[np.arange(n), idx], 1e-300, None)
    ce = -np.log(picked)

    multiplier = np.ones(n)
    if cfg.ordinal:
        pred = np.argmax(logits, axis=1) + 1
        multiplier = 1.0 + (pred - targets) ** 2 / cfg.n_classes

    sample_weight = np.ones(n)
    if cfg.weighted:
        if weights is None:
            weights = (np.array(cfg.class_weights) if cfg.class_weights is not None
                       else np.ones(cfg.n_classes))
        sample_weight = np.asarray(weights, dtype=np.float64)[idx]

    scale = multiplier * sample_weight
    values = scale * ce
    grad = probs.copy()
    grad[np.arange(n), idx] -= 1.0
    grad *= scale[:, None]
    return values, grad
