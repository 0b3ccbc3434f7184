#!/usr/bin/env python3
"""Walkthrough: dispersion-adaptive thresholds and the dwell timers.

Shows how the three utilization thresholds travel with the Median
Absolute Deviation of recent history, then steps the decision engine
through a ramp so the timer behavior is visible.
"""

import numpy as np

from flashscale.scaling import (
    ScalerState,
    ThresholdConfig,
    compute_thresholds,
    decide,
    median_absolute_deviation,
    plan_capacity,
)

cfg = ThresholdConfig(c1=0.5, c2=1.0, c3=2.0, scaling_delay=2)

print("thresholds follow history dispersion (c1=0.5, c2=1, c3=2):")
rng = np.random.default_rng(3)
for label, history in (
    ("flat history        ", np.full(48, 0.62)),
    ("gentle noise        ", 0.62 + rng.normal(0, 0.02, 48)),
    ("daily swing         ", 0.5 + 0.25 * np.sin(np.arange(48) / 6)),
    ("violent oscillation ", 0.5 + 0.45 * np.sin(np.arange(48) / 2)),
):
    mad = median_absolute_deviation(history)
    thr = compute_thresholds(history, cfg)
    print(f"  {label} MAD {mad:5.3f} -> upper {thr.thr_u:5.3f}  "
          f"near-upper {thr.thr_bu:5.3f}  lower {thr.thr_l:5.3f}")

print("\nstepping the engine through a ramp (thresholds frozen for clarity):")
state = ScalerState(thresholds=compute_thresholds(0.5 + 0.25 * np.sin(np.arange(48) / 6), cfg))
thr = state.thresholds
print(f"  bands: up > {thr.thr_u:.3f} > dwell-up > {thr.thr_bu:.3f} > hold > {thr.thr_l:.3f} > dwell-down")
for predicted in (0.55, 0.90, 0.90, 0.90, 0.95, 0.40, 0.10, 0.10, 0.10, 0.10):
    signal, state = decide(state, predicted, cfg)
    print(f"  predicted utilization {predicted:4.2f} -> {signal.value:10s} "
          f"(up timer {state.tick_up_timer}, down timer {state.tick_down_timer})")

print("\nsignals become VM counts through the demand/capacity gap:")
for predicted_demand, fleet in ((700.0, 5), (700.0, 10), (80.0, 10)):
    delta = plan_capacity(predicted_demand, fleet, vm_capacity=100.0, min_vms=1, max_vms=50)
    print(f"  predicted {predicted_demand:6.0f} units, fleet {fleet:2d} VMs -> delta {delta:+d}")
