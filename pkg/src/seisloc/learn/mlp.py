"""Feedforward grid-cell classifier trained with plain numpy.

Architecture: input -> 1024 -> 1024 -> 512 -> n_cells, ReLU hidden units,
softmax output, cross-entropy loss.  Dropout is applied between hidden layers
at training time only.  Optimization is mini-batch gradient descent with
per-parameter first/second-moment step scaling (Adam).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ArityError, DegenerateDataError, FormatError
from ..simulate import Dataset

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class MlpHyper:
    hidden: tuple[int, ...] = (1024, 1024, 512)
    batch_size: int = 128
    learning_rate: float = 1e-3
    epochs: int = 100
    patience: int = 10
    dropout: float = 0.2
    val_fraction: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    dtype: np.dtype = np.dtype(np.float64)


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feat_mean: np.ndarray
    feat_std: np.ndarray
    n_classes: int

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def _normalize(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=self.weights[0].dtype))
        if features.shape[1] != self.weights[0].shape[0]:
            raise ArityError(
                f"feature dimension {features.shape[1]} does not match model "
                f"input {self.weights[0].shape[0]}"
            )
        return (features - self.feat_mean) / self.feat_std

    def logits(self, features: np.ndarray) -> np.ndarray:
        a = self._normalize(features)
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if l < last:
                np.maximum(a, 0.0, out=a)
        return a

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(features), axis=1)


def _init_params(sizes, rng, dtype):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(2.0 / fan_in)
        weights.append((rng.standard_normal((fan_in, fan_out)) * scale).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return weights, biases


def _predict_normalized(weights, biases, a):
    last = len(weights) - 1
    for l, (w, b) in enumerate(zip(weights, biases)):
        a = a @ w + b
        if l < last:
            a = np.maximum(a, 0.0)
    return np.argmax(a, axis=1)


def _forward_backward(weights, biases, x, labels, dropout_masks=None):
    """Mean cross-entropy loss and parameter gradients for one batch.

    dropout_masks, when given, holds one inverted-dropout mask per hidden
    layer except the last (None entries skip a layer).
    """
    last = len(weights) - 1
    activations = [x]
    a = x
    for l, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w + b
        if l < last:
            a = np.maximum(z, 0.0)
            if dropout_masks is not None and l < last - 1 and dropout_masks[l] is not None:
                a = a * dropout_masks[l]
            activations.append(a)
        else:
            logits = z

    # Log-softmax cross-entropy, numerically stable.
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    log_probs = shifted - log_z
    n = x.shape[0]
    loss = -float(np.mean(log_probs[np.arange(n), labels]))

    probs = np.exp(log_probs)
    delta = probs
    delta[np.arange(n), labels] -= 1.0
    delta /= n

    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    for l in range(last, -1, -1):
        grads_w[l] = activations[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = delta @ weights[l].T
            if dropout_masks is not None and l - 1 < last - 1 and dropout_masks[l - 1] is not None:
                delta = delta * dropout_masks[l - 1]
            delta[activations[l] <= 0.0] = 0.0
    return loss, grads_w, grads_b


def train_mlp(
    train: Dataset,
    hyper: MlpHyper = MlpHyper(),
    rng: np.random.Generator | None = None,
    n_classes: int | None = None,
) -> MlpModel:
    """Train a grid-cell classifier; deterministic for a given rng state."""
    if rng is None:
        rng = np.random.default_rng(0)
    if len(train) < 2 or len(np.unique(train.labels)) < 2:
        raise DegenerateDataError("training data must contain at least 2 distinct labels")
    if n_classes is None:
        n_classes = train.config.n_cells
    dtype = hyper.dtype

    features = np.asarray(train.features, dtype=dtype)
    labels = np.asarray(train.labels, dtype=np.int64)
    mean = features.mean(axis=0)
    std = np.maximum(features.std(axis=0), _STD_FLOOR)
    x_all = (features - mean) / std

    # Held-out slice for the early-stopping plateau check.
    n = len(x_all)
    n_val = int(round(hyper.val_fraction * n))
    order = rng.permutation(n)
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx, val_idx = order, order[:0]
    x_train, y_train = x_all[train_idx], labels[train_idx]
    x_val, y_val = x_all[val_idx], labels[val_idx]

    sizes = [features.shape[1], *hyper.hidden, n_classes]
    weights, biases = _init_params(sizes, rng, dtype)
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    keep = 1.0 - hyper.dropout
    n_hidden = len(hyper.hidden)
    best_val = -np.inf
    best_params = None
    stale = 0
    step = 0
    for _epoch in range(hyper.epochs):
        perm = rng.permutation(len(x_train))
        for start in range(0, len(perm), hyper.batch_size):
            batch = perm[start : start + hyper.batch_size]
            xb, yb = x_train[batch], y_train[batch]
            if hyper.dropout > 0.0 and n_hidden > 1:
                masks = [
                    (rng.random((len(batch), sizes[l + 1])) < keep).astype(dtype) / keep
                    for l in range(n_hidden - 1)
                ]
            else:
                masks = None
            _, grads_w, grads_b = _forward_backward(weights, biases, xb, yb, masks)
            step += 1
            bc1 = 1.0 - hyper.beta1**step
            bc2 = 1.0 - hyper.beta2**step
            for l in range(len(weights)):
                for p, g, mom, vel in (
                    (weights[l], grads_w[l], m_w[l], v_w[l]),
                    (biases[l], grads_b[l], m_b[l], v_b[l]),
                ):
                    mom *= hyper.beta1
                    mom += (1.0 - hyper.beta1) * g
                    vel *= hyper.beta2
                    vel += (1.0 - hyper.beta2) * g * g
                    p -= hyper.learning_rate * (mom / bc1) / (
                        np.sqrt(vel / bc2) + hyper.adam_eps
                    )

        if len(x_val):
            val_acc = float(np.mean(_predict_normalized(weights, biases, x_val) == y_val))
            if val_acc > best_val:
                best_val = val_acc
                best_params = ([w.copy() for w in weights], [b.copy() for b in biases])
                stale = 0
            else:
                stale += 1
                if stale >= hyper.patience:
                    break

    if best_params is not None:
        weights, biases = best_params
    return MlpModel(weights, biases, mean.astype(dtype), std.astype(dtype), n_classes)


_FORMAT_TAG = "seisloc-mlp-v1"


def save_mlp(path, model: MlpModel) -> None:
    """Self-describing npz container; round-trip reproduces predictions."""
    meta = json.dumps(
        {"format": _FORMAT_TAG, "layers": len(model.weights), "n_classes": model.n_classes}
    )
    arrays = {"meta": np.array(meta)}
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        arrays[f"w{l}"] = w
        arrays[f"b{l}"] = b
    arrays["feat_mean"] = model.feat_mean
    arrays["feat_std"] = model.feat_std
    np.savez(path, **arrays)


def load_mlp(path) -> MlpModel:
    with np.load(path, allow_pickle=False) as data:
        try:
            meta = json.loads(str(data["meta"]))
        except KeyError as exc:
            raise FormatError(f"{path}: missing model metadata") from exc
        if meta.get("format") != _FORMAT_TAG:
            raise FormatError(f"{path}: not a {_FORMAT_TAG} container")
        n_layers = meta["layers"]
        weights = [data[f"w{l}"] for l in range(n_layers)]
        biases = [data[f"b{l}"] for l in range(n_layers)]
        return MlpModel(weights, biases, data["feat_mean"], data["feat_std"], meta["n_classes"])
