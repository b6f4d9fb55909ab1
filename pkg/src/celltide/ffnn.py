"""Two-layer feed-forward baseline: T inputs -> 5 relu units -> 1 sigmoid unit.

The window is consumed as a flat vector, so unlike the recurrent model this
baseline has no built-in notion of time order. Batched internals, per-window
wrappers, same serialization conventions as the LSTM.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import modelio
from .dataset import ScalerParams
from .linalg import ShapeError, sigmoid

WEIGHT_KEYS = ("W1", "b1", "W2", "b2")

HIDDEN_UNITS = 5


@dataclass
class FfnnParams:
    W1: np.ndarray  # (5, T)
    b1: np.ndarray  # (5,)
    W2: np.ndarray  # (1, 5)
    b2: np.ndarray  # (1,)
    head: str = "sigmoid"

    @property
    def window_len(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def weights(self) -> dict:
        return {k: getattr(self, k) for k in WEIGHT_KEYS}

    def copy(self) -> "FfnnParams":
        return replace(self, **{k: v.copy() for k, v in self.weights().items()})


def zero_grads(params) -> dict:
    return {k: np.zeros_like(v) for k, v in params.weights().items()}


def init_params(window_len: int, seed: int = 0, hidden: int = HIDDEN_UNITS,
                head: str = "sigmoid") -> FfnnParams:
    """Glorot-uniform weights, zero biases; same PRNG scheme as the LSTM."""
    if window_len < 1:
        raise ValueError("window length must be >= 1")
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (window_len + hidden))
    lim2 = np.sqrt(6.0 / (hidden + 1))
    return FfnnParams(
        W1=rng.uniform(-lim1, lim1, size=(hidden, window_len)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-lim2, lim2, size=(1, hidden)),
        b2=np.zeros(1),
        head=head)


def forward_batch(windows: np.ndarray, p: FfnnParams):
    """Predictions (B,) for a batch of flat windows (B, T)."""
    x = np.asarray(windows, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.window_len:
        raise ShapeError(f"expected (batch, {p.window_len}) windows, got {x.shape}")
    pre1 = x @ p.W1.T + p.b1
    h = np.maximum(pre1, 0.0)
    score = h @ p.W2.T + p.b2
    y = sigmoid(score).ravel() if p.head == "sigmoid" else score.ravel()
    return y, {"x": x, "pre1": pre1, "h": h, "y": y}


def backward_batch(cache: dict, d_loss_d_yhat: np.ndarray, p: FfnnParams) -> dict:
    """Batch-summed gradients; relu subgradient at 0 is taken as 0."""
    if cache["x"].shape[1] != p.window_len or cache["h"].shape[1] != p.hidden:
        raise ShapeError("cache does not match parameter shapes")
    d_y = np.asarray(d_loss_d_yhat, dtype=np.float64)
    y = cache["y"]
    if d_y.shape != y.shape:
        raise ShapeError(f"upstream gradient shape {d_y.shape} != predictions {y.shape}")
    d_score = d_y * y * (1.0 - y) if p.head == "sigmoid" else d_y
    grads = zero_grads(p)
    grads["W2"] += d_score[None, :] @ cache["h"]
    grads["b2"] += d_score.sum(keepdims=True)
    d_h = d_score[:, None] * p.W2
    d_pre1 = d_h * (cache["pre1"] > 0.0)
    grads["W1"] += d_pre1.T @ cache["x"]
    grads["b1"] += d_pre1.sum(axis=0)
    return grads


def forward(window: np.ndarray, p: FfnnParams):
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1:
        raise ShapeError("window must be 1-D")
    y, cache = forward_batch(window[None, :], p)
    return float(y[0]), cache


def backward(cache: dict, d_loss_d_yhat: float, p: FfnnParams) -> dict:
    return backward_batch(cache, np.array([d_loss_d_yhat]), p)


def serialize(p: FfnnParams, scaler: ScalerParams | None = None) -> str:
    obj = {
        "type": "ffnn",
        "hidden": p.hidden,
        "T": p.window_len,
        "head": p.head,
        "scaler": None if scaler is None else {"min": scaler.min, "max": scaler.max},
        "weights": {k: v for k, v in p.weights().items()},
    }
    return modelio.dumps(obj)


def deserialize(text: str):
    """Returns (params, window_len, scaler-or-None)."""
    obj = modelio.loads(text)
    modelio.check_type_tag(obj, "ffnn")
    hidden = int(modelio.require(obj, "hidden"))
    window_len = int(modelio.require(obj, "T"))
    head = obj.get("head", "sigmoid")
    if head not in ("sigmoid", "linear"):
        raise modelio.ModelFormatError(f"field 'head' has unknown value {head!r}")
    params = FfnnParams(
        W1=modelio.require_array(obj, "weights.W1", (hidden, window_len)),
        b1=modelio.require_array(obj, "weights.b1", (hidden,)),
        W2=modelio.require_array(obj, "weights.W2", (1, hidden)),
        b2=modelio.require_array(obj, "weights.b2", (1,)),
        head=head)
    scaler_obj = obj.get("scaler")
    scaler = None
    if scaler_obj is not None:
        scaler = ScalerParams(float(modelio.require(obj, "scaler.min")),
                              float(modelio.require(obj, "scaler.max")))
    return params, window_len, scaler
