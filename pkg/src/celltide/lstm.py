"""Single-layer LSTM regressor with hand-derived backpropagation through time.

A window of T past values is run through a chain of LSTM cells sharing one
parameter set; the prediction is an affine map of the final hidden state
through a sigmoid (data is min-max normalized to [0,1]) or, optionally, a
linear head. Internals are batched over windows; the per-window entry points
wrap a batch of one.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import modelio
from .dataset import ScalerParams
from .linalg import ShapeError, sigmoid

WEIGHT_KEYS = ("W_f", "W_i", "W_c", "W_o", "b_f", "b_i", "b_c", "b_o", "W_y", "b_y")


@dataclass
class LstmParams:
    W_f: np.ndarray  # (H, H+D)
    W_i: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray  # (H,)
    b_i: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray
    W_y: np.ndarray  # (1, H)
    b_y: np.ndarray  # (1,)
    head: str = "sigmoid"  # "sigmoid" or "linear"

    @property
    def hidden(self) -> int:
        return self.W_f.shape[0]

    @property
    def input_size(self) -> int:
        return self.W_f.shape[1] - self.W_f.shape[0]

    def weights(self) -> dict:
        return {k: getattr(self, k) for k in WEIGHT_KEYS}

    def copy(self) -> "LstmParams":
        return replace(self, **{k: v.copy() for k, v in self.weights().items()})


@dataclass
class LstmState:
    a: np.ndarray  # hidden activation, (H,)
    c: np.ndarray  # cell state, (H,)


def zero_grads(params) -> dict:
    return {k: np.zeros_like(v) for k, v in params.weights().items()}


def init_params(hidden: int, input_size: int = 1, seed: int = 0,
                head: str = "sigmoid") -> LstmParams:
    """Glorot-uniform weights, zero biases except forget bias = 1."""
    if hidden < 1:
        raise ValueError("hidden size must be >= 1")
    rng = np.random.default_rng(seed)

    def glorot(rows, cols, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(rows, cols))

    hd = hidden + input_size
    mats = [glorot(hidden, hd, hd, hidden) for _ in range(4)]
    w_y = glorot(1, hidden, hidden, 1)
    return LstmParams(
        *mats,
        b_f=np.ones(hidden), b_i=np.zeros(hidden),
        b_c=np.zeros(hidden), b_o=np.zeros(hidden),
        W_y=w_y, b_y=np.zeros(1), head=head)


def _step_batch(x, a_prev, c_prev, p):
    """One cell step for a batch: x (B,D), states (B,H). Returns new states + cache."""
    z = np.concatenate([a_prev, x], axis=1)
    g_f = sigmoid(z @ p.W_f.T + p.b_f)
    g_i = sigmoid(z @ p.W_i.T + p.b_i)
    c_u = np.tanh(z @ p.W_c.T + p.b_c)
    g_o = sigmoid(z @ p.W_o.T + p.b_o)
    c = g_f * c_prev + g_i * c_u
    tanh_c = np.tanh(c)
    a = g_o * tanh_c
    cache = {"z": z, "g_f": g_f, "g_i": g_i, "c_u": c_u, "g_o": g_o,
             "c_prev": c_prev, "tanh_c": tanh_c}
    return a, c, cache


def forward_batch(windows: np.ndarray, p: LstmParams):
    """Run the cell chain over a batch of windows (B, T); zero initial state.

    Returns predictions (B,) and the caches needed by backward_batch.
    """
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 2 or windows.shape[1] < 1:
        raise ShapeError(f"expected (batch, T>=1) windows, got shape {windows.shape}")
    if p.input_size != 1:
        raise ShapeError("forward_batch feeds scalar inputs; params expect "
                         f"input size {p.input_size}")
    n, t_len = windows.shape
    a = np.zeros((n, p.hidden))
    c = np.zeros((n, p.hidden))
    steps = []
    for t in range(t_len):
        a, c, cache = _step_batch(windows[:, t:t + 1], a, c, p)
        steps.append(cache)
    score = a @ p.W_y.T + p.b_y  # (B, 1)
    y = sigmoid(score).ravel() if p.head == "sigmoid" else score.ravel()
    return y, {"steps": steps, "a_final": a, "y": y, "hidden": p.hidden}


def backward_batch(caches: dict, d_loss_d_yhat: np.ndarray, p: LstmParams) -> dict:
    """Gradients of sum_b d_loss_d_yhat[b] * yhat[b] w.r.t. every weight/bias.

    Exact BPTT through all steps of the forward call that produced `caches`;
    gradients are summed over the batch.
    """
    if caches["hidden"] != p.hidden or caches["steps"][0]["z"].shape[1] != p.hidden + p.input_size:
        raise ShapeError("cache does not match parameter shapes")
    d_y = np.asarray(d_loss_d_yhat, dtype=np.float64)
    y = caches["y"]
    if d_y.shape != y.shape:
        raise ShapeError(f"upstream gradient shape {d_y.shape} != predictions {y.shape}")
    grads = zero_grads(p)
    d_score = d_y * y * (1.0 - y) if p.head == "sigmoid" else d_y
    grads["W_y"] += d_score[None, :] @ caches["a_final"]
    grads["b_y"] += d_score.sum(keepdims=True)
    h = p.hidden
    d_a = d_score[:, None] * p.W_y  # (B, H)
    d_c = np.zeros_like(d_a)
    for cache in reversed(caches["steps"]):
        g_f, g_i, g_o = cache["g_f"], cache["g_i"], cache["g_o"]
        c_u, tanh_c, z = cache["c_u"], cache["tanh_c"], cache["z"]
        d_c = d_c + d_a * g_o * (1.0 - tanh_c ** 2)
        d_go_pre = d_a * tanh_c * g_o * (1.0 - g_o)
        d_gi_pre = d_c * c_u * g_i * (1.0 - g_i)
        d_cu_pre = d_c * g_i * (1.0 - c_u ** 2)
        d_gf_pre = d_c * cache["c_prev"] * g_f * (1.0 - g_f)
        grads["W_f"] += d_gf_pre.T @ z
        grads["W_i"] += d_gi_pre.T @ z
        grads["W_c"] += d_cu_pre.T @ z
        grads["W_o"] += d_go_pre.T @ z
        grads["b_f"] += d_gf_pre.sum(axis=0)
        grads["b_i"] += d_gi_pre.sum(axis=0)
        grads["b_c"] += d_cu_pre.sum(axis=0)
        grads["b_o"] += d_go_pre.sum(axis=0)
        d_z = (d_gf_pre @ p.W_f + d_gi_pre @ p.W_i
               + d_cu_pre @ p.W_c + d_go_pre @ p.W_o)
        d_a = d_z[:, :h]
        d_c = d_c * g_f
    return grads


def cell_forward(x_t: np.ndarray, prev: LstmState, p: LstmParams):
    """One cell step for a single window position; x_t has length input_size."""
    x_t = np.asarray(x_t, dtype=np.float64).reshape(1, -1)
    if x_t.shape[1] != p.input_size or prev.a.shape != (p.hidden,):
        raise ShapeError(
            f"cell_forward: input {x_t.shape[1]} / state {prev.a.shape} "
            f"incompatible with params (H={p.hidden}, D={p.input_size})")
    a, c, cache = _step_batch(x_t, prev.a[None, :], prev.c[None, :], p)
    return LstmState(a[0], c[0]), cache


def forward(window: np.ndarray, p: LstmParams):
    """Sequence-to-one prediction for a single window; returns (yhat, caches)."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1 or window.size < 1:
        raise ShapeError("window must be a non-empty 1-D sequence")
    y, caches = forward_batch(window[None, :], p)
    return float(y[0]), caches


def backward(caches: dict, d_loss_d_yhat: float, p: LstmParams) -> dict:
    """Gradients for a single-window forward call."""
    return backward_batch(caches, np.array([d_loss_d_yhat]), p)


def serialize(p: LstmParams, window_len: int, scaler: ScalerParams | None = None) -> str:
    obj = {
        "type": "lstm",
        "hidden": p.hidden,
        "T": window_len,
        "head": p.head,
        "scaler": None if scaler is None else {"min": scaler.min, "max": scaler.max},
        "weights": {k: v for k, v in p.weights().items()},
    }
    return modelio.dumps(obj)


def deserialize(text: str):
    """Returns (params, window_len, scaler-or-None)."""
    obj = modelio.loads(text)
    modelio.check_type_tag(obj, "lstm")
    hidden = int(modelio.require(obj, "hidden"))
    window_len = int(modelio.require(obj, "T"))
    head = obj.get("head", "sigmoid")
    if head not in ("sigmoid", "linear"):
        raise modelio.ModelFormatError(f"field 'head' has unknown value {head!r}")
    hd = hidden + 1
    kw = {}
    for k in ("W_f", "W_i", "W_c", "W_o"):
        kw[k] = modelio.require_array(obj, f"weights.{k}", (hidden, hd))
    for k in ("b_f", "b_i", "b_c", "b_o"):
        kw[k] = modelio.require_array(obj, f"weights.{k}", (hidden,))
    kw["W_y"] = modelio.require_array(obj, "weights.W_y", (1, hidden))
    kw["b_y"] = modelio.require_array(obj, "weights.b_y", (1,))
    params = LstmParams(head=head, **kw)
    scaler_obj = obj.get("scaler")
    scaler = None
    if scaler_obj is not None:
        scaler = ScalerParams(float(modelio.require(obj, "scaler.min")),
                              float(modelio.require(obj, "scaler.max")))
    return params, window_len, scaler
