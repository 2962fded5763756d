"""Recurrent reasoning agent: an LSTM classifier over encoded questions.

A single LSTM layer consumes the 11-step one-hot sequence; the final hidden
state feeds a 17-way softmax whose argmax is the predicted remainder digit.
The final hidden state doubles as the feature vector handed to the transfer
models. Gradients are computed analytically (full BPTT) so they can be
verified against finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checkpoint, kernels
from .optim import Adam
from .taskgen import SEQ_LEN, VOCAB

log = logging.getLogger(__name__)

HIDDEN_SIZES = (32, 64, 128, 256)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class ReasonerModel:
    """LSTM parameters; gate blocks ordered (input, forget, output, candidate)."""

    hidden_size: int
    seed: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def init(cls, hidden_size: int, seed: int) -> ReasonerModel:
        rng = np.random.default_rng(seed)
        h, v = hidden_size, VOCAB
        scale = 1.0 / np.sqrt(h)
        params = {
            "W": rng.uniform(-scale, scale, size=(v + h, 4 * h)),
            "b": np.zeros(4 * h),
            "Wy": rng.uniform(-scale, scale, size=(h, v)),
            "by": np.zeros(v),
        }
        # Forget-gate bias starts at 1 to keep early gradients flowing.
        params["b"][h : 2 * h] = 1.0
        return cls(hidden_size=hidden_size, seed=seed, params=params)

    def save(self, path: str | Path) -> None:
        checkpoint.save(path, "reasoner", {"hidden_size": self.hidden_size, "seed": self.seed}, self.params)

    @classmethod
    def load(cls, path: str | Path) -> ReasonerModel:
        meta, arrays = checkpoint.load(path, expect_kind="reasoner")
        return cls(hidden_size=int(meta["hidden_size"]), seed=int(meta["seed"]), params=arrays)


def _forward(model: ReasonerModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    """Run the LSTM over x (B, 11, 17); returns (probs, last hidden, cache)."""
    hsz = model.hidden_size
    bsz = x.shape[0]
    W, b = model.params["W"], model.params["b"]
    h = np.zeros((bsz, hsz))
    c = np.zeros((bsz, hsz))
    cache = {"x": x, "h": [h], "c": [c], "gates": []}
    for t in range(x.shape[1]):
        z = np.concatenate([x[:, t, :], h], axis=1) @ W + b
        i, f, o, g, c, tc, h = kernels.lstm_cell_forward(z, cache["c"][-1])
        cache["gates"].append((i, f, o, g, tc))
        cache["h"].append(h)
        cache["c"].append(c)
    probs = _softmax(h @ model.params["Wy"] + model.params["by"])
    return probs, h, cache


def loss_and_grads(
    model: ReasonerModel, x: np.ndarray, y: np.ndarray
) -> tuple[float, float, dict[str, np.ndarray]]:
    """Mean cross-entropy, accuracy, and analytic parameter gradients."""
    hsz = model.hidden_size
    bsz = x.shape[0]
    probs, h_last, cache = _forward(model, x)
    loss = float(-np.mean(np.log(probs[np.arange(bsz), y] + 1e-12)))
    acc = float(np.mean(probs.argmax(axis=1) == y))

    dlogits = probs.copy()
    dlogits[np.arange(bsz), y] -= 1.0
    dlogits /= bsz
    grads = {
        "Wy": h_last.T @ dlogits,
        "by": dlogits.sum(axis=0),
        "W": np.zeros_like(model.params["W"]),
        "b": np.zeros_like(model.params["b"]),
    }
    W = model.params["W"]
    dh = dlogits @ model.params["Wy"].T
    dc = np.zeros((bsz, hsz))
    for t in range(x.shape[1] - 1, -1, -1):
        i, f, o, g, tc = cache["gates"][t]
        dz, dc = kernels.lstm_cell_backward(dh, dc, i, f, o, g, tc, cache["c"][t])
        inp = np.concatenate([cache["x"][:, t, :], cache["h"][t]], axis=1)
        grads["W"] += inp.T @ dz
        grads["b"] += dz.sum(axis=0)
        dh = (dz @ W.T)[:, VOCAB:]
    return loss, acc, grads


def train(
    data: list[tuple[np.ndarray, int]],
    epochs: int = 100,
    lr: float = 1e-3,
    batch: int = 128,
    seed: int = 0,
    hidden_size: int = 256,
    target_accuracy: float | None = None,
) -> tuple[ReasonerModel, list[tuple[int, float, float]]]:
    """Minibatch Adam training; returns the model and (epoch, loss, acc) curve.

    When ``target_accuracy`` is set, training stops at the first epoch whose
    running training accuracy reaches it.
    """
    if not data:
        raise ValueError("empty training set")
    if any(not (0 <= y <= 8) for _, y in data):
        raise ValueError("answers must lie in [0, 8]")
    model = ReasonerModel.init(hidden_size, seed)
    opt = Adam(model.params, lr)
    rng = np.random.default_rng(seed)
    x_all = np.stack([x for x, _ in data])
    y_all = np.array([y for _, y in data])
    curve = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(data))
        losses, accs = [], []
        for start in range(0, len(data), batch):
            idx = order[start : start + batch]
            loss, acc, grads = loss_and_grads(model, x_all[idx], y_all[idx])
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch}, batch offset {start} (lr={lr})"
                )
            opt.step(model.params, grads)
            losses.append(loss * len(idx))
            accs.append(acc * len(idx))
        ep_loss = sum(losses) / len(data)
        ep_acc = sum(accs) / len(data)
        curve.append((epoch, ep_loss, ep_acc))
        log.info("epoch %d loss %.5f acc %.4f", epoch, ep_loss, ep_acc)
        if target_accuracy is not None and ep_acc >= target_accuracy:
            break
    return model, curve


def predict(model: ReasonerModel, encoded: np.ndarray) -> tuple[int, np.ndarray]:
    probs, _, _ = _forward(model, encoded[None, :, :])
    return int(probs[0].argmax()), probs[0]


def predict_batch(model: ReasonerModel, encoded: np.ndarray) -> np.ndarray:
    """Argmax classes for a stack of encoded questions (B, 11, 17)."""
    probs, _, _ = _forward(model, encoded)
    return probs.argmax(axis=1)


def extract_features(model: ReasonerModel, encoded: np.ndarray) -> np.ndarray:
    """Final-step hidden state for one encoded question; length H."""
    _, h, _ = _forward(model, encoded[None, :, :])
    return h[0]


def extract_features_batch(model: ReasonerModel, encoded: np.ndarray) -> np.ndarray:
    _, h, _ = _forward(model, encoded)
    return h


def write_curve_csv(curve: list[tuple[int, float, float]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss,accuracy\n")
        for epoch, loss, acc in curve:
            fh.write(f"{epoch},{loss:.8f},{acc:.6f}\n")
