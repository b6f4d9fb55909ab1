"""Training loop, Adam optimizer, and evaluation shared by both neural models.

Mean absolute error is both the training loss and the reported metric; its
subgradient at zero error is taken as 0. Loss is computed on the normalized
scale; evaluation reports predictions and MAE on the original scale.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import ffnn, lstm
from .dataset import ScalerParams, SplitSpec, WindowSet, windows_for_range


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; message carries the epoch index."""


@dataclass
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    window: int = 12

    def __post_init__(self):
        if self.epochs < 1 or self.learning_rate < 0 or self.batch_size < 1:
            raise ValueError("epochs >= 1, learning_rate >= 0, batch_size >= 1 required")


@dataclass
class History:
    """Per-epoch (epoch, train_mae, val_mae, wall_ms) records."""

    rows: list = field(default_factory=list)

    def append(self, epoch: int, train_mae: float, val_mae: float, wall_ms: float):
        self.rows.append((epoch, train_mae, val_mae, wall_ms))

    def __len__(self):
        return len(self.rows)

    @property
    def final_val_mae(self) -> float:
        return self.rows[-1][2]

    def train_maes(self):
        return [r[1] for r in self.rows]

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,train_mae,val_mae,wall_ms\n")
            for epoch, tr, va, ms in self.rows:
                fh.write(f"{epoch},{tr:.17g},{va:.17g},{ms:.3f}\n")


def mae(pred, truth) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape or pred.size == 0:
        raise ValueError(f"mae: need equal nonzero lengths, got {pred.shape} vs {truth.shape}")
    return float(np.mean(np.abs(pred - truth)))


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_params(cls, weights: dict) -> "AdamState":
        return cls(m={k: np.zeros_like(w) for k, w in weights.items()},
                   v={k: np.zeros_like(w) for k, w in weights.items()})


def adam_step(weights: dict, grads: dict, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One in-place Adam update with bias correction."""
    state.t += 1
    b1t = 1.0 - beta1 ** state.t
    b2t = 1.0 - beta2 ** state.t
    for k, w in weights.items():
        g = grads[k]
        if g.shape != w.shape:
            raise ValueError(f"adam_step: gradient {k} shape {g.shape} != param {w.shape}")
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * g
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * g * g
        w -= lr * (state.m[k] / b1t) / (np.sqrt(state.v[k] / b2t) + eps)


_MODEL_OPS = {
    "lstm": (lstm.forward_batch, lstm.backward_batch),
    "ffnn": (ffnn.forward_batch, ffnn.backward_batch),
}


def _predict_batch(kind: str, windows: np.ndarray, params) -> np.ndarray:
    fwd, _ = _MODEL_OPS[kind]
    y, _ = fwd(windows, params)
    return y


def fit(kind: str, params, train_set: WindowSet, val_set: WindowSet,
        config: TrainConfig) -> History:
    """Train `params` in place for the configured epochs; returns the History.

    Mini-batch order is a per-epoch seeded permutation; batch gradients are
    averaged. Validation is a full deterministic pass after each epoch.
    """
    if kind not in _MODEL_OPS:
        raise ValueError(f"unknown model kind {kind!r}")
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("train and validation sets must be nonempty")
    fwd, bwd = _MODEL_OPS[kind]
    weights = params.weights()
    state = AdamState.for_params(weights)
    rng = np.random.default_rng(config.seed)
    history = History()
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        order = rng.permutation(len(train_set))
        abs_err_sum = 0.0
        for lo in range(0, len(order), config.batch_size):
            idx = order[lo:lo + config.batch_size]
            xb, tb = train_set.inputs[idx], train_set.targets[idx]
            y, cache = fwd(xb, params)
            err = y - tb
            if not np.all(np.isfinite(err)):
                raise TrainingDiverged(f"non-finite loss in epoch {epoch}")
            abs_err_sum += float(np.abs(err).sum())
            grads = bwd(cache, np.sign(err) / len(idx), params)
            adam_step(weights, grads, state, config.learning_rate)
        train_mae = abs_err_sum / len(order)
        val_mae = mae(_predict_batch(kind, val_set.inputs, params), val_set.targets)
        history.append(epoch, train_mae, val_mae,
                       (time.perf_counter() - start) * 1e3)
    return history


def train_model(kind: str, train_set: WindowSet, val_set: WindowSet,
                config: TrainConfig, hidden: int = 50):
    """Initialize fresh parameters from the config seed and train them.

    Returns (params, History). `hidden` only applies to the LSTM; the
    feed-forward baseline is fixed at its 5 relu units.
    """
    if kind == "lstm":
        params = lstm.init_params(hidden, input_size=1, seed=config.seed)
    elif kind == "ffnn":
        params = ffnn.init_params(train_set.window_len, seed=config.seed)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    history = fit(kind, params, train_set, val_set, config)
    return params, history


def evaluate(kind: str, params, series_values, split: SplitSpec, window_len: int,
             scaler: ScalerParams):
    """Rolling one-step predictions over the test slice, on the original scale.

    Each test slot is predicted from the true (normalized) history window
    ending just before it. Returns (target_slots, predictions, test_mae).
    """
    if scaler is None:
        raise ValueError("evaluate requires the scaler the model was trained with")
    values = np.asarray(series_values, dtype=np.float64)
    normed = scaler.transform(values)
    test_set = windows_for_range(normed, window_len, split.test_start,
                                 split.test_start + split.n_test)
    preds = scaler.inverse(_predict_batch(kind, test_set.inputs, params))
    truth = values[test_set.target_slots]
    return test_set.target_slots, preds, mae(preds, truth)
