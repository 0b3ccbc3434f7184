#!/usr/bin/env python3
"""Walkthrough: the LSTM demand forecaster on its own.

Trains a small network on a noisy daily pattern, checks its analytic
gradients against finite differences, inspects a few predictions, and
round-trips a checkpoint.
"""

import tempfile
from pathlib import Path

import numpy as np

from flashscale.forecast import (
    SlidingWindow,
    TrainConfig,
    gradient_check,
    init_params,
    load_model,
    lstm_forward,
    lstm_train,
    make_windows,
    mape,
    save_model,
    LstmModel,
)

rng = np.random.default_rng(7)

# --- gradients first: trust nothing you have not differentiated twice ------
probe = LstmModel(
    hidden_size=6, window_length=8, horizon=1,
    params=init_params(6, rng), norm_lo=0.0, norm_hi=100.0,
)
err = gradient_check(probe, rng.uniform(0, 100, size=8), 42.0)
print(f"analytic vs finite-difference gradients: max relative error {err:.2e}")
print()

# --- a daily-looking series -------------------------------------------------
t = np.arange(900)
series = (120 + 80 * np.sin(2 * np.pi * t / 288) + rng.normal(0, 6, len(t))).clip(min=0)
win = SlidingWindow(length=24, horizon=2)

model = lstm_train(series[:700], win, TrainConfig(epochs=150, seed=1), hidden_size=16)
print(f"trained 16-unit model: mse {model.training_mse[0]:.4f} -> {model.training_mse[-1]:.5f} "
      f"over {len(model.training_mse)} epochs")

inputs, targets = make_windows(series, win)
pairs = [(targets[i], lstm_forward(model, inputs[i])) for i in range(700, len(targets))]
print(f"held-out MAPE on the last {len(pairs)} samples: {mape(pairs):.1f}%")

print("\n  sample predictions (2 steps ahead):")
for i in range(700, 712, 3):
    print(f"    actual {targets[i]:7.1f}   predicted {lstm_forward(model, inputs[i]):7.1f}")

# --- checkpoints are exact --------------------------------------------------
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.ckpt"
    save_model(model, path)
    clone = load_model(path)
    window = inputs[800]
    print(f"\ncheckpoint round trip: {lstm_forward(model, window):.6f} "
          f"== {lstm_forward(clone, window):.6f}")
