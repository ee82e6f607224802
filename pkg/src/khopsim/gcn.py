"""A small dense GCN trained full-batch with hand-written backprop and Adam.

Layer l computes ``Â H W_l``; hidden layers apply ReLU, the output layer
does not. There are no bias terms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph
from .sbm import Dataset

CHECKPOINT_FORMAT = "khopsim-gcn"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    max_epochs: int = 200
    patience: int = 50
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    depth: int = 2
    hidden: int = 32

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_epochs < 0 or self.patience < 1:
            raise ValueError("max_epochs must be >= 0 and patience >= 1")
        if self.depth < 1 or self.hidden < 1:
            raise ValueError("depth and hidden must be >= 1")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls([np.zeros_like(w) for w in params], [np.zeros_like(w) for w in params], 0)


@dataclass
class RunResult:
    params: list[np.ndarray]
    predictions: np.ndarray
    probabilities: np.ndarray
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    test_accuracy: float = float("nan")

    def accuracy(self, labels, mask) -> float:
        from .metrics import accuracy
        return accuracy(self.predictions, labels, mask)


def normalize_adjacency(g: Graph) -> np.ndarray:
    """``D^-1/2 (A + I) D^-1/2`` with D the degree matrix of ``A + I``."""
    a = g.adj.astype(np.float64)
    np.fill_diagonal(a, 1.0)
    inv_sqrt = 1.0 / np.sqrt(a.sum(axis=1))
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


def layer_dims(d_in: int, num_classes: int, depth: int, hidden: int = 32) -> list[int]:
    return [d_in] + [hidden] * (depth - 1) + [num_classes]


def init_params(dims: list[int], seed) -> list[np.ndarray]:
    """Glorot-uniform weights for each consecutive pair in ``dims``."""
    rng = np.random.default_rng(seed)
    params = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return params


def _check_chain(params, a_hat, x):
    n = a_hat.shape[0]
    if a_hat.shape != (n, n) or x.shape[0] != n:
        raise ValueError(f"shape mismatch: Â {a_hat.shape}, X {x.shape}")
    d = x.shape[1]
    for l, w in enumerate(params):
        if w.ndim != 2 or w.shape[0] != d:
            raise ValueError(f"layer {l} expects input width {w.shape[0]}, got {d}")
        d = w.shape[1]


def gcn_forward(params, a_hat, x):
    """Return ``(hidden, logits)``.

    ``hidden[l]`` is the input to layer l (``hidden[0] is x``); the
    pre-activations needed for backprop are recoverable from it because
    ReLU output is positive exactly where its input was.
    """
    x = np.asarray(x, dtype=np.float64)
    _check_chain(params, a_hat, x)
    hidden = [x]
    h = x
    for w in params[:-1]:
        h = np.maximum(a_hat @ (h @ w), 0.0)
        hidden.append(h)
    logits = a_hat @ (h @ params[-1])
    return hidden, logits


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def softmax_cross_entropy(logits, labels, mask):
    """Mean negative log-likelihood over the masked rows; returns
    ``(loss, probabilities)`` with probabilities for every row."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("loss mask selects no nodes")
    labels = np.asarray(labels)
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    idx = np.flatnonzero(mask)
    nll = log_z[idx] - shifted[idx, labels[idx]]
    probs = np.exp(shifted - log_z[:, None])
    return float(nll.mean()), probs


def gradients(params, a_hat, x, labels, mask):
    """Return ``(loss, grads)`` for the masked cross-entropy."""
    hidden, logits = gcn_forward(params, a_hat, x)
    loss, probs = softmax_cross_entropy(logits, labels, mask)
    mask = np.asarray(mask, dtype=bool)
    delta = probs
    delta[np.flatnonzero(mask), np.asarray(labels)[mask]] -= 1.0
    delta[~mask] = 0.0
    delta /= mask.sum()

    grads = [None] * len(params)
    # Â is symmetric, so Âᵀ δ == Â δ
    for l in range(len(params) - 1, -1, -1):
        back = a_hat @ delta
        grads[l] = hidden[l].T @ back
        if l:
            delta = (back @ params[l].T) * (hidden[l] > 0)
    return loss, grads


def adam_step(state: AdamState, params, grads, cfg: TrainConfig):
    """One bias-corrected Adam update. Returns new ``(params, state)``."""
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    t = state.t + 1
    m = [b1 * mi + (1 - b1) * g for mi, g in zip(state.m, grads)]
    v = [b2 * vi + (1 - b2) * g * g for vi, g in zip(state.v, grads)]
    c1 = 1 - b1 ** t
    c2 = 1 - b2 ** t
    new = [w - cfg.learning_rate * (mi / c1) / (np.sqrt(vi / c2) + cfg.adam_epsilon)
           for w, mi, vi in zip(params, m, v)]
    return new, AdamState(m, v, t)


def predict(params, a_hat, x):
    """Argmax labels (lowest index on ties) and softmax probabilities."""
    _, logits = gcn_forward(params, a_hat, x)
    probs = softmax(logits)
    return probs.argmax(axis=1), probs


def train(dataset: Dataset, cfg: TrainConfig, a_hat=None) -> RunResult:
    """Full-batch training with early stopping on validation loss.

    Epoch 0 is the initialization; each later epoch is one Adam step
    followed by a validation pass. Training stops after ``patience`` epochs
    without a strictly lower validation loss, and the best epoch's weights
    are returned.
    """
    if a_hat is None:
        a_hat = normalize_adjacency(dataset.graph)
    x, y = dataset.features, dataset.labels
    num_classes = int(y.max()) + 1
    params = init_params(layer_dims(x.shape[1], num_classes, cfg.depth, cfg.hidden), cfg.seed)
    state = AdamState.zeros_like(params)

    _, logits = gcn_forward(params, a_hat, x)
    train_curve = [softmax_cross_entropy(logits, y, dataset.train_mask)[0]]
    val_curve = [softmax_cross_entropy(logits, y, dataset.val_mask)[0]]
    best_loss, best_epoch, best_params = val_curve[0], 0, params

    for epoch in range(1, cfg.max_epochs + 1):
        loss, grads = gradients(params, a_hat, x, y, dataset.train_mask)
        params, state = adam_step(state, params, grads, cfg)
        _, logits = gcn_forward(params, a_hat, x)
        val = softmax_cross_entropy(logits, y, dataset.val_mask)[0]
        train_curve.append(loss)
        val_curve.append(val)
        if val < best_loss:
            best_loss, best_epoch, best_params = val, epoch, params
        elif epoch - best_epoch >= cfg.patience:
            break

    preds, probs = predict(best_params, a_hat, x)
    result = RunResult(best_params, preds, probs, train_curve, val_curve, best_epoch)
    result.test_accuracy = result.accuracy(y, dataset.test_mask)
    return result


def hidden_representations(params, a_hat, x) -> list[np.ndarray]:
    """Node representations after every layer (last entry: logits)."""
    hidden, logits = gcn_forward(params, a_hat, x)
    return hidden[1:] + [logits]


# -- checkpoints --------------------------------------------------------------

def save_checkpoint(path, params, seed: int, **meta) -> tuple[Path, Path]:
    """Write a JSON header to ``path`` and the weights, concatenated
    row-major as little-endian float64, to ``path`` + ``.bin``."""
    path = Path(path)
    payload = Path(str(path) + ".bin")
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dims": [int(params[0].shape[0])] + [int(w.shape[1]) for w in params],
        "depth": len(params),
        "seed": int(seed),
        "dtype": "<f8",
        "payload": payload.name,
        **meta,
    }
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    payload.write_bytes(b"".join(np.ascontiguousarray(w, dtype="<f8").tobytes() for w in params))
    return path, payload


def load_checkpoint(path) -> tuple[list[np.ndarray], dict]:
    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
    flat = np.frombuffer((path.parent / header["payload"]).read_bytes(), dtype="<f8")
    dims = header["dims"]
    params, offset = [], 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        size = fan_in * fan_out
        params.append(flat[offset:offset + size].reshape(fan_in, fan_out).astype(np.float64))
        offset += size
    if offset != flat.size:
        raise ValueError(f"payload holds {flat.size} values, header implies {offset}")
    return params, header
