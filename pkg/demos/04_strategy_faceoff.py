#!/usr/bin/env python3
"""Walkthrough: the full four-strategy comparison on the bundled scenario.

Reproduces what ``flashscale compare`` does, but keeps the results in
memory and prints the flash-crowd window side by side. Takes a couple
of minutes; the forecasters train from scratch.
"""

from pathlib import Path

from flashscale.report import summary
from flashscale.scenario import (
    STRATEGY_NAMES,
    build_strategy,
    build_workloads,
    load_scenario,
    train_models,
)
from flashscale.sim import run_simulation

scenario = load_scenario(Path(__file__).resolve().parents[1] / "data" / "scenario.json")
print(f"scenario: {scenario.trace.name} + {scenario.spike.name} at "
      f"{[s.offset_hours for s in scenario.splices]}h, seed {scenario.seed}")

workloads = build_workloads(scenario)
print(f"workload: {len(workloads.spliced)} intervals, "
      f"peak {workloads.spliced.demand.max():.0f} units/interval")

print("\ntraining the three forecasters (takes a minute or two)...")
models = train_models(scenario, workloads)
for name, model in models.items():
    print(f"  {name:9s} final mse {model.training_mse[-1]:.5f} "
          f"range [{model.norm_lo:.0f}, {model.norm_hi:.0f}]")

results = {}
for name in STRATEGY_NAMES:
    strategy = build_strategy(scenario, name, models)
    results[name] = run_simulation(workloads.spliced, strategy, scenario.vm, scenario.sim)
    print(f"simulated {name}")

lo, hi = scenario.spike_window
print(f"\nflash-crowd window (hours {scenario.spike_window_hours[0]:.0f}-"
      f"{scenario.spike_window_hours[1]:.0f}):")
print(f"{'strategy':12s} {'peak VMs':>9s} {'mean RT ms':>12s} {'SLA viol %':>11s} "
      f"{'total cost':>11s} {'release lag':>12s}")
for name, result in results.items():
    s = summary(result, scenario.sim.slo_ms, window=(lo, hi))
    print(f"{name:12s} {s['peak_vms']:9.0f} {s['mean_rt']:12.0f} "
          f"{s['sla_violation_pct']:11.1f} {s['total_cost']:11.1f} {s['release_lag']:12.0f}")

print("\nhourly running VMs through the event:")
per_hour = scenario.intervals_per_hour
print("hour  " + "".join(f"{n:>12s}" for n in STRATEGY_NAMES))
for hour in range(229, 245, 2):
    row = f"{hour:4d}  "
    for name in STRATEGY_NAMES:
        row += f"{results[name].running_vms[(hour + 1) * per_hour - 1]:12.0f}"
    print(row)
