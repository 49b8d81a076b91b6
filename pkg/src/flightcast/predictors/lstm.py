"""Single-layer LSTM forecaster with hand-written backpropagation.

Everything is plain numpy in float64: forward recurrence, exact gradients
through the gate algebra, and an Adam loop. The model predicts the next
waypoint from the previous 16; longer horizons roll the model forward on
its own output. Feature scaling is z-score with statistics taken from the
training inputs and stored inside the parameters, so a saved model is
self-contained.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..domain import ATTRIBUTES, CANONICAL_DECIMALS, Waypoint, round_value
from ..windowing import STEP_SECONDS, Window

logger = logging.getLogger(__name__)

ATTR_DIM = len(ATTRIBUTES)
FORMAT_TAG = "flightcast-lstm/1"

_GATES = ("i", "f", "o", "g")


@dataclass
class TrainConfig:
    """Training hyperparameters; defaults follow the common setup."""

    epochs: int = 30
    batch_size: int = 4
    learning_rate: float = 2e-4
    seed: int = 0
    hidden_dim: int = 32

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        # Zero is allowed so a no-op training run can serve as a smoke test.
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.hidden_dim < 1:
            raise ValueError("hidden dim must be >= 1")


class LstmParams:
    """Gate weights, output projection, and normalization statistics."""

    def __init__(self, input_dim: int, hidden_dim: int, arrays: dict[str, np.ndarray],
                 norm_mean: np.ndarray, norm_std: np.ndarray):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.arrays = arrays
        self.norm_mean = np.asarray(norm_mean, dtype=np.float64)
        self.norm_std = np.asarray(norm_std, dtype=np.float64)
        if np.any(self.norm_std <= 0):
            raise ValueError("normalization std must be positive for every attribute")

    @classmethod
    def initialize(
        cls,
        input_dim: int,
        hidden_dim: int,
        rng: np.random.Generator,
        norm_mean: np.ndarray | None = None,
        norm_std: np.ndarray | None = None,
    ) -> "LstmParams":
        """Uniform(-s, s) weights with s = 1/sqrt(hidden), zero biases."""
        s = 1.0 / np.sqrt(hidden_dim)
        arrays: dict[str, np.ndarray] = {}
        for gate in _GATES:
            arrays[f"w_{gate}"] = rng.uniform(-s, s, size=(hidden_dim, input_dim))
            arrays[f"u_{gate}"] = rng.uniform(-s, s, size=(hidden_dim, hidden_dim))
            arrays[f"b_{gate}"] = np.zeros(hidden_dim)
        arrays["w_out"] = rng.uniform(-s, s, size=(input_dim, hidden_dim))
        arrays["b_out"] = np.zeros(input_dim)
        if norm_mean is None:
            norm_mean = np.zeros(input_dim)
        if norm_std is None:
            norm_std = np.ones(input_dim)
        return cls(input_dim, hidden_dim, arrays, norm_mean, norm_std)

    def copy(self) -> "LstmParams":
        return LstmParams(
            self.input_dim,
            self.hidden_dim,
            {k: v.copy() for k, v in self.arrays.items()},
            self.norm_mean.copy(),
            self.norm_std.copy(),
        )

    # Flattened views, used by the finite-difference gradient check.
    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.arrays[k].ravel() for k in sorted(self.arrays)])

    def with_vector(self, vec: np.ndarray) -> "LstmParams":
        out = self.copy()
        offset = 0
        for k in sorted(out.arrays):
            size = out.arrays[k].size
            out.arrays[k] = vec[offset : offset + size].reshape(out.arrays[k].shape).copy()
            offset += size
        return out

    def save(self, path: str | Path) -> None:
        obj = {
            "format": FORMAT_TAG,
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "norm_mean": self.norm_mean.tolist(),
            "norm_std": self.norm_std.tolist(),
            "arrays": {k: v.tolist() for k, v in sorted(self.arrays.items())},
        }
        Path(path).write_text(json.dumps(obj) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "LstmParams":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        if obj.get("format") != FORMAT_TAG:
            raise ValueError(f"unrecognized model file format: {obj.get('format')!r}")
        arrays = {k: np.asarray(v, dtype=np.float64) for k, v in obj["arrays"].items()}
        return cls(obj["input_dim"], obj["hidden_dim"], arrays,
                   np.asarray(obj["norm_mean"]), np.asarray(obj["norm_std"]))


def normalize(params: LstmParams, values: np.ndarray) -> np.ndarray:
    return (np.asarray(values, dtype=np.float64) - params.norm_mean) / params.norm_std


def denormalize(params: LstmParams, values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) * params.norm_std + params.norm_mean


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign for numerical stability at large |x|.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _forward_batch(params: LstmParams, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Run the recurrence over x of shape (batch, steps, input_dim)."""
    a = params.arrays
    batch, steps, _ = x.shape
    h = np.zeros((batch, params.hidden_dim))
    c = np.zeros((batch, params.hidden_dim))
    cache: dict = {"x": x, "steps": []}
    for t in range(steps):
        xt = x[:, t, :]
        i = _sigmoid(xt @ a["w_i"].T + h @ a["u_i"].T + a["b_i"])
        f = _sigmoid(xt @ a["w_f"].T + h @ a["u_f"].T + a["b_f"])
        o = _sigmoid(xt @ a["w_o"].T + h @ a["u_o"].T + a["b_o"])
        g = np.tanh(xt @ a["w_g"].T + h @ a["u_g"].T + a["b_g"])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        cache["steps"].append(
            {"xt": xt, "h_prev": h, "c_prev": c, "i": i, "f": f, "o": o, "g": g, "tanh_c": tanh_c}
        )
        h, c = h_new, c_new
    cache["h_final"] = h
    prediction = h @ a["w_out"].T + a["b_out"]
    return prediction, cache


def _backward_batch(params: LstmParams, cache: dict, d_prediction: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of the cached forward pass for d(loss)/d(prediction)."""
    a = params.arrays
    grads = {k: np.zeros_like(v) for k, v in a.items()}
    grads["w_out"] = d_prediction.T @ cache["h_final"]
    grads["b_out"] = d_prediction.sum(axis=0)
    dh = d_prediction @ a["w_out"]
    dc = np.zeros_like(dh)
    for step in reversed(cache["steps"]):
        i, f, o, g, tanh_c = step["i"], step["f"], step["o"], step["g"], step["tanh_c"]
        da_o = dh * tanh_c * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tanh_c**2)
        da_f = dc * step["c_prev"] * f * (1.0 - f)
        da_i = dc * g * i * (1.0 - i)
        da_g = dc * i * (1.0 - g**2)
        for gate, da in zip(_GATES, (da_i, da_f, da_o, da_g)):
            grads[f"w_{gate}"] += da.T @ step["xt"]
            grads[f"u_{gate}"] += da.T @ step["h_prev"]
            grads[f"b_{gate}"] += da.sum(axis=0)
        dh = da_i @ a["u_i"] + da_f @ a["u_f"] + da_o @ a["u_o"] + da_g @ a["u_g"]
        dc = dc * f
    return grads


def lstm_forward(params: LstmParams, sequence: np.ndarray) -> tuple[np.ndarray, dict]:
    """One normalized (steps, input_dim) sequence to a next-step prediction.

    Returns the prediction vector and the activation cache needed for an
    exact backward pass.
    """
    sequence = np.asarray(sequence, dtype=np.float64)
    if not np.all(np.isfinite(sequence)):
        raise ValueError("non-finite value in input sequence")
    prediction, cache = _forward_batch(params, sequence[None, :, :])
    return prediction[0], cache


def lstm_loss_gradients(
    params: LstmParams, inputs: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean squared error over a normalized batch and its exact gradients.

    inputs has shape (batch, steps, input_dim), targets (batch, input_dim);
    the loss is averaged over both batch and attribute dimensions.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    prediction, cache = _forward_batch(params, inputs)
    diff = prediction - targets
    loss = float(np.mean(diff**2))
    d_prediction = 2.0 * diff / diff.size
    return loss, _backward_batch(params, cache, d_prediction)


def lstm_loss(params: LstmParams, inputs: np.ndarray, targets: np.ndarray) -> float:
    """Forward-only batch MSE; what finite-difference probes should call."""
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    prediction, _ = _forward_batch(params, inputs)
    return float(np.mean((prediction - targets) ** 2))


def _window_arrays(windows: Sequence[Window]) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([[w.values() for w in win.inputs] for win in windows], dtype=np.float64)
    y = np.array([win.targets[0].values() for win in windows], dtype=np.float64)
    return x, y


def training_mse(params: LstmParams, windows: Sequence[Window]) -> float:
    """Normalized-space one-step MSE of the model on the given windows."""
    x, y = _window_arrays(windows)
    prediction, _ = _forward_batch(params, normalize(params, x))
    return float(np.mean((prediction - normalize(params, y)) ** 2))


def lstm_train(windows: Sequence[Window], cfg: TrainConfig) -> LstmParams:
    """Fit the one-step predictor with Adam on shuffled mini-batches.

    Normalization statistics are computed from the training inputs before
    any update. Deterministic for a fixed (windows, cfg): a single seeded
    generator drives initialization and every shuffle.
    """
    if not windows:
        raise ValueError("training set is empty")
    horizons = {w.horizon for w in windows}
    if len(horizons) > 1:
        raise ValueError(f"training windows mix horizons: {sorted(horizons)}")

    x_raw, y_raw = _window_arrays(windows)
    mean = x_raw.reshape(-1, ATTR_DIM).mean(axis=0)
    std = x_raw.reshape(-1, ATTR_DIM).std(axis=0)
    std[std == 0.0] = 1.0  # constant attributes normalize to zero

    rng = np.random.default_rng(cfg.seed)
    params = LstmParams.initialize(ATTR_DIM, cfg.hidden_dim, rng, mean, std)
    x = normalize(params, x_raw)
    y = normalize(params, y_raw)

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m = {k: np.zeros_like(v) for k, v in params.arrays.items()}
    v = {k: np.zeros_like(val) for k, val in params.arrays.items()}
    step = 0
    n = len(windows)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            loss, grads = lstm_loss_gradients(params, x[batch], y[batch])
            epoch_loss += loss * len(batch)
            step += 1
            for key, grad in grads.items():
                m[key] = beta1 * m[key] + (1.0 - beta1) * grad
                v[key] = beta2 * v[key] + (1.0 - beta2) * grad**2
                m_hat = m[key] / (1.0 - beta1**step)
                v_hat = v[key] / (1.0 - beta2**step)
                params.arrays[key] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        epoch_loss /= n
        if not np.isfinite(epoch_loss):
            raise ValueError(f"training diverged at epoch {epoch}")
        logger.info("epoch %d/%d loss %.6g", epoch, cfg.epochs, epoch_loss)
    return params


def lstm_predict(params: LstmParams, window: Window, horizon: int) -> list[Waypoint]:
    """Iterative rollout: predict, append, slide, repeat.

    Each prediction is denormalized, appended to the raw sequence (the
    oldest step drops off), and the final outputs are rounded to canonical
    precision with timestamps advancing by 60 s.
    """
    sequence = np.array([w.values() for w in window.inputs], dtype=np.float64)
    last_ts = window.inputs[-1].timestamp
    out = []
    for step in range(1, horizon + 1):
        prediction, _ = lstm_forward(params, normalize(params, sequence))
        raw = denormalize(params, prediction)
        sequence = np.vstack([sequence[1:], raw])
        values = [round_value(float(value), places) for value, places in zip(raw, CANONICAL_DECIMALS)]
        out.append(Waypoint(last_ts + step * STEP_SECONDS, *values))
    return out
