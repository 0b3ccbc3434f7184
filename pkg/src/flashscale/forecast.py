"""Single-layer LSTM demand forecaster, built from scratch on numpy.

Implements windowed dataset construction, min-max normalization,
forward inference, training by full-batch backpropagation through time
with gradient clipping, a finite-difference gradient checker, and MAPE
accounting for online accuracy tracking. Training is deterministic for
a given seed; trained models are immutable value objects.

Gate equations are the standard formulation (logistic input/forget/
output gates, tanh candidate and cell output, no peepholes) with a
linear scalar output head read from the final hidden state.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SeriesTooShort(ValueError):
    """Series cannot supply a single (window, target) sample."""


class DegenerateRange(ValueError):
    """Training demand is constant; min-max normalization undefined."""


class DivergedLoss(ArithmeticError):
    """Training loss became non-finite."""


class ShapeMismatch(ValueError):
    """Input window length differs from the model's trained length."""


class NoValidPairs(ValueError):
    """MAPE requested but every pair has actual == 0."""


@dataclass(frozen=True)
class SlidingWindow:
    """Window geometry: ``length`` inputs predicting ``horizon`` steps ahead."""

    length: int
    horizon: int = 1

    def __post_init__(self):
        if self.length < 1 or self.horizon < 1:
            raise ValueError("window length and horizon must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 250
    learning_rate: float = 0.3
    bptt_truncation: int | None = None  # None backpropagates the full window
    seed: int = 0
    train_fraction: float = 1.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.train_fraction <= 1:
            raise ValueError("train_fraction must be in (0, 1]")


# Parameter keys in a fixed order so iteration, checkpoints, and
# gradient flattening are deterministic.
PARAM_KEYS = (
    "w_i", "w_f", "w_o", "w_c",
    "u_i", "u_f", "u_o", "u_c",
    "b_i", "b_f", "b_o", "b_c",
    "w_y", "b_y",
)

GRADIENT_CLIP = 5.0
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class LstmModel:
    """Parameters and normalization constants of a trained LSTM regressor.

    ``params`` maps each key in PARAM_KEYS to a float64 array:
    per-gate input weights ``w_*`` of shape (H,), recurrent weights
    ``u_*`` of shape (H, H), biases ``b_*`` of shape (H,), output
    weights ``w_y`` of shape (H,) and scalar bias ``b_y``.
    """

    hidden_size: int
    window_length: int
    horizon: int
    params: dict[str, np.ndarray]
    norm_lo: float
    norm_hi: float
    training_mse: tuple[float, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.norm_hi <= self.norm_lo:
            raise DegenerateRange(
                f"normalizer range [{self.norm_lo}, {self.norm_hi}] is empty"
            )
        for key in PARAM_KEYS:
            if key not in self.params:
                raise ValueError(f"missing parameter {key}")
            if not np.all(np.isfinite(self.params[key])):
                raise ValueError(f"parameter {key} contains non-finite values")


def zero_params(hidden_size: int) -> dict[str, np.ndarray]:
    h = hidden_size
    params: dict[str, np.ndarray] = {}
    for gate in "ifoc":
        params[f"w_{gate}"] = np.zeros(h)
        params[f"u_{gate}"] = np.zeros((h, h))
        params[f"b_{gate}"] = np.zeros(h)
    params["w_y"] = np.zeros(h)
    params["b_y"] = np.zeros(())
    return params


def init_params(hidden_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Small uniform init; forget-gate bias starts at 1 to keep memory open."""
    h = hidden_size
    k = 1.0 / math.sqrt(h)
    params: dict[str, np.ndarray] = {}
    for gate in "ifoc":
        params[f"w_{gate}"] = rng.uniform(-k, k, size=h)
        params[f"u_{gate}"] = rng.uniform(-k, k, size=(h, h))
        params[f"b_{gate}"] = np.zeros(h)
    params["b_f"] = np.ones(h)
    params["w_y"] = rng.uniform(-k, k, size=h)
    params["b_y"] = np.zeros(())
    return params


def make_windows(series, win: SlidingWindow) -> tuple[np.ndarray, np.ndarray]:
    """Slice a series into (inputs, targets) training samples.

    Sample ``i`` has input ``demand[i : i + length]`` and target
    ``demand[i + length - 1 + horizon]``; there are
    ``len - length - horizon + 1`` samples. ``series`` may be a
    WorkloadSeries or a plain 1-d sequence.
    """
    demand = np.asarray(getattr(series, "demand", series), dtype=np.float64)
    n = len(demand) - win.length - win.horizon + 1
    if n < 1:
        raise SeriesTooShort(
            f"need >= {win.length + win.horizon} points, got {len(demand)}"
        )
    inputs = np.stack([demand[i : i + win.length] for i in range(n)])
    targets = np.array([demand[i + win.length - 1 + win.horizon] for i in range(n)])
    return inputs, targets


def normalize(value, model: LstmModel):
    """Affine map sending the training min to 0 and max to 1.

    Extrapolates outside [min, max] rather than clipping, so unseen
    spike magnitudes stay ordered.
    """
    return (np.asarray(value, dtype=np.float64) - model.norm_lo) / (
        model.norm_hi - model.norm_lo
    )


def denormalize(value, model: LstmModel):
    return np.asarray(value, dtype=np.float64) * (model.norm_hi - model.norm_lo) + model.norm_lo


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _stack_gates(params: dict[str, np.ndarray]):
    """Concatenate the per-gate parameters so each timestep needs one
    matmul instead of four. Gate order: input, forget, output, candidate."""
    w = np.concatenate([params["w_i"], params["w_f"], params["w_o"], params["w_c"]])
    u = np.vstack([params["u_i"], params["u_f"], params["u_o"], params["u_c"]])
    b = np.concatenate([params["b_i"], params["b_f"], params["b_o"], params["b_c"]])
    return w, u, b


def _forward_batch(params: dict[str, np.ndarray], x: np.ndarray):
    """Run the LSTM over a batch of normalized windows.

    ``x`` has shape (n_samples, n_steps). Returns the scalar outputs
    (n_samples,) and the per-step caches needed for BPTT.
    """
    n, steps = x.shape
    h_size = len(params["w_y"])
    w, u, b = _stack_gates(params)
    u_t = u.T
    h = np.zeros((n, h_size))
    c = np.zeros((n, h_size))
    cache = []
    for t in range(steps):
        x_t = x[:, t]
        z = x_t[:, None] * w + h @ u_t + b
        gates = _sigmoid(z[:, : 3 * h_size])
        i = gates[:, :h_size]
        f = gates[:, h_size : 2 * h_size]
        o = gates[:, 2 * h_size :]
        g = np.tanh(z[:, 3 * h_size :])
        c_next = f * c + i * g
        tanh_c = np.tanh(c_next)
        h_next = o * tanh_c
        cache.append((x_t, h, c, i, f, o, g, tanh_c))
        h, c = h_next, c_next
    y = h @ params["w_y"] + params["b_y"]
    return y, h, cache


def _backward_batch(
    params: dict[str, np.ndarray],
    x: np.ndarray,
    targets: np.ndarray,
    truncation: int | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean-squared-error loss and its gradients via BPTT.

    ``truncation`` limits how many steps back from the end gradients
    flow; None unrolls the whole window.
    """
    n, steps = x.shape
    h_size = len(params["w_y"])
    y, h_last, cache = _forward_batch(params, x)
    err = y - targets
    loss = float(np.mean(err**2))

    _, u, _ = _stack_gates(params)
    dw = np.zeros(4 * h_size)
    du = np.zeros((4 * h_size, h_size))
    db = np.zeros(4 * h_size)
    dy = 2.0 * err / n
    grad_w_y = h_last.T @ dy
    grad_b_y = np.asarray(dy.sum())
    dh = dy[:, None] * params["w_y"]
    dc = np.zeros_like(dh)
    dz = np.empty((n, 4 * h_size))
    first_step = 0 if truncation is None else max(0, steps - truncation)
    for t in range(steps - 1, first_step - 1, -1):
        x_t, h_prev, c_prev, i, f, o, g, tanh_c = cache[t]
        do = dh * tanh_c * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tanh_c**2)
        df = dc * c_prev * f * (1.0 - f)
        di = dc * g * i * (1.0 - i)
        dg = dc * i * (1.0 - g**2)
        dz[:, :h_size] = di
        dz[:, h_size : 2 * h_size] = df
        dz[:, 2 * h_size : 3 * h_size] = do
        dz[:, 3 * h_size :] = dg
        dw += dz.T @ x_t
        du += dz.T @ h_prev
        db += dz.sum(axis=0)
        dh = dz @ u
        dc = dc * f
    grads = {"w_y": grad_w_y, "b_y": grad_b_y}
    for k, gate in enumerate("ifoc"):
        grads[f"w_{gate}"] = dw[k * h_size : (k + 1) * h_size]
        grads[f"u_{gate}"] = du[k * h_size : (k + 1) * h_size]
        grads[f"b_{gate}"] = db[k * h_size : (k + 1) * h_size]
    return loss, grads


def loss_and_gradients(
    model: LstmModel, window, target: float
) -> tuple[float, dict[str, np.ndarray]]:
    """Normalized-space squared-error loss and gradients for one sample."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (model.window_length,):
        raise ShapeMismatch(
            f"window length {window.shape} != trained length {model.window_length}"
        )
    x = normalize(window, model)[None, :]
    t = np.array([float(normalize(target, model))])
    return _backward_batch(model.params, x, t)


def lstm_forward(model: LstmModel, window) -> float:
    """Predict demand ``horizon`` steps past the end of ``window``.

    State starts at zero, the normalized window is fed sequentially,
    and the linear head reads the final hidden state. The result is
    denormalized and clamped to be non-negative. Pure function of
    (model, window).
    """
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (model.window_length,):
        raise ShapeMismatch(
            f"window of shape {window.shape}, model trained on ({model.window_length},)"
        )
    x = normalize(window, model)[None, :]
    y, _, _ = _forward_batch(model.params, x)
    return max(0.0, float(denormalize(y[0], model)))


def _clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = math.sqrt(sum(float(np.sum(g**2)) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for key in grads:
            grads[key] *= scale


def lstm_train(
    series,
    win: SlidingWindow,
    cfg: TrainConfig,
    hidden_size: int = 32,
) -> LstmModel:
    """Fit an LSTM regressor to a demand series.

    Trains on the first ``cfg.train_fraction`` of the series with
    full-batch gradient descent on normalized mean squared error,
    clipping the gradient norm at 5.0. The normalizer comes from the
    training split only. Deterministic for a fixed ``cfg.seed``;
    per-epoch training MSE is kept on the returned model.
    """
    demand = np.asarray(getattr(series, "demand", series), dtype=np.float64)
    n_train = max(int(len(demand) * cfg.train_fraction), win.length + win.horizon)
    train_part = demand[:n_train]
    lo, hi = float(train_part.min()), float(train_part.max())
    if hi <= lo:
        raise DegenerateRange("training series is constant; cannot normalize")

    inputs, targets = make_windows(train_part, win)
    x = (inputs - lo) / (hi - lo)
    t = (targets - lo) / (hi - lo)

    rng = np.random.default_rng(cfg.seed)
    params = init_params(hidden_size, rng)
    history: list[float] = []
    lr = cfg.learning_rate
    for _ in range(cfg.epochs):
        loss, grads = _backward_batch(params, x, t, cfg.bptt_truncation)
        if not math.isfinite(loss):
            raise DivergedLoss(f"loss became {loss} at epoch {len(history)}")
        history.append(loss)
        _clip_gradients(grads, GRADIENT_CLIP)
        for key in PARAM_KEYS:
            params[key] = params[key] - lr * grads[key]

    return LstmModel(
        hidden_size=hidden_size,
        window_length=win.length,
        horizon=win.horizon,
        params=params,
        norm_lo=lo,
        norm_hi=hi,
        training_mse=tuple(history),
    )


def holdout_mape(model: LstmModel, series, win: SlidingWindow, start: int = 0) -> float:
    """MAPE of the model over samples whose window starts at or after ``start``."""
    inputs, targets = make_windows(series, win)
    pairs = [
        (targets[i], lstm_forward(model, inputs[i]))
        for i in range(start, len(targets))
    ]
    return mape(pairs)


def gradient_check(
    model: LstmModel,
    window,
    target: float,
    grads: dict[str, np.ndarray] | None = None,
    step: float = 1e-5,
) -> float:
    """Compare analytic gradients against central finite differences.

    Perturbs every parameter by ``step`` both ways, recomputes the
    normalized loss, and returns the maximum relative error against
    the analytic gradient (supplied via ``grads`` or computed here).
    Correct BPTT lands well below 1e-4 in float64.
    """
    window = np.asarray(window, dtype=np.float64)
    x = normalize(window, model)[None, :]
    t = np.array([float(normalize(target, model))])
    if grads is None:
        _, grads = _backward_batch(model.params, x, t)

    params = {key: model.params[key].copy() for key in PARAM_KEYS}
    worst = 0.0
    for key in PARAM_KEYS:
        flat = params[key].reshape(-1)
        grad_flat = np.asarray(grads[key]).reshape(-1)
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + step
            y_hi, _, _ = _forward_batch(params, x)
            loss_hi = float(np.mean((y_hi - t) ** 2))
            flat[idx] = keep - step
            y_lo, _, _ = _forward_batch(params, x)
            loss_lo = float(np.mean((y_lo - t) ** 2))
            flat[idx] = keep
            numeric = (loss_hi - loss_lo) / (2.0 * step)
            analytic = float(grad_flat[idx])
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst


def mape(pairs) -> float:
    """Mean absolute percentage error over pairs with nonzero actuals."""
    valid = [(a, p) for a, p in pairs if a != 0]
    if not valid:
        raise NoValidPairs("every pair has actual == 0")
    return 100.0 * sum(abs(a - p) / abs(a) for a, p in valid) / len(valid)


class MapeAccumulator:
    """Windowed MAPE over the most recent (actual, predicted) pairs.

    Pairs with actual == 0 occupy window slots but are excluded from
    the error; ``skipped`` counts how many such pairs are currently
    retained. ``value()`` returns +inf until a valid pair exists so
    callers can treat an empty accumulator as "no evidence".
    """

    def __init__(self, window_capacity: int = 24):
        if window_capacity < 1:
            raise ValueError("window_capacity must be >= 1")
        self.pairs: deque[tuple[float, float]] = deque(maxlen=window_capacity)

    def update(self, actual: float, predicted: float) -> "MapeAccumulator":
        self.pairs.append((float(actual), float(predicted)))
        return self

    @property
    def skipped(self) -> int:
        return sum(1 for a, _ in self.pairs if a == 0)

    def value(self) -> float:
        try:
            return mape(self.pairs)
        except NoValidPairs:
            return math.inf

    def __len__(self) -> int:
        return len(self.pairs)


def save_model(model: LstmModel, path) -> None:
    """Write a model checkpoint as a versioned key-value text file.

    Matrices are stored row-major; floats use repr so a round trip is
    bit-exact.
    """
    lines = [
        f"format_version {CHECKPOINT_VERSION}",
        f"hidden_size {model.hidden_size}",
        f"window_length {model.window_length}",
        f"horizon {model.horizon}",
        f"norm_lo {model.norm_lo!r}",
        f"norm_hi {model.norm_hi!r}",
    ]
    for key in PARAM_KEYS:
        values = np.asarray(model.params[key]).reshape(-1)
        lines.append(f"{key} " + " ".join(repr(float(v)) for v in values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_model(path) -> LstmModel:
    """Load a checkpoint, rejecting version or dimension mismatches."""
    fields: dict[str, str] = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        fields[key] = rest
    version = int(fields.get("format_version", "-1"))
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    h = int(fields["hidden_size"])
    shapes = {}
    for gate in "ifoc":
        shapes[f"w_{gate}"] = (h,)
        shapes[f"u_{gate}"] = (h, h)
        shapes[f"b_{gate}"] = (h,)
    shapes["w_y"] = (h,)
    shapes["b_y"] = ()
    params: dict[str, np.ndarray] = {}
    for key, shape in shapes.items():
        flat = np.array([float(v) for v in fields[key].split()])
        expected = int(np.prod(shape)) if shape else 1
        if flat.size != expected:
            raise ValueError(
                f"parameter {key} has {flat.size} values, expected {expected}"
            )
        params[key] = flat.reshape(shape) if shape else flat.reshape(())[()] * np.ones(())
    return LstmModel(
        hidden_size=h,
        window_length=int(fields["window_length"]),
        horizon=int(fields["horizon"]),
        params=params,
        norm_lo=float(fields["norm_lo"]),
        norm_hi=float(fields["norm_hi"]),
    )
