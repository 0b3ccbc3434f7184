"""Command-line entry point.

Subcommands: ``ingest`` turns a raw access log into a demand-series
CSV, ``train`` fits and checkpoints the forecasters of a scenario,
``simulate`` runs one strategy, ``compare`` runs all four and writes
the comparison tables, ``gradcheck`` self-tests the forecaster's
gradients against finite differences.

Exit codes: 0 success, 1 configuration error, 2 data error. Every
subcommand writes only under ``--out-dir``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from flashscale import forecast
from flashscale.scenario import (
    STRATEGY_NAMES,
    Scenario,
    build_strategy,
    build_workloads,
    load_scenario,
    models_needed,
    run_compare,
    train_models,
    write_training_log,
)
from flashscale.sim import ConfigInvalid, run_simulation
from flashscale.traces import (
    BadHitTrace,
    EmptyInput,
    IoFailure,
    aggregate_demand,
    bytes_cost,
    load_trace,
    unit_cost,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_scenario_with_overrides(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        scenario = replace(scenario, seed=args.seed)
    if getattr(args, "interval", None) is not None:
        scenario = replace(scenario, interval_s=float(args.interval))
    if getattr(args, "trace", None) is not None:
        scenario = replace(scenario, trace=Path(args.trace))
    if getattr(args, "spike", None) is not None:
        scenario = replace(scenario, spike=Path(args.spike))
    return scenario


def cmd_ingest(args) -> int:
    out = _out_dir(args)
    cost = unit_cost if args.cost == "unit" else bytes_cost()
    try:
        with open(args.trace, "rb") as handle:
            records, skipped = load_trace(handle)
        series = aggregate_demand(records, float(args.interval), cost)
    except (OSError, IoFailure) as exc:
        return _fail(f"cannot read trace {args.trace}: {exc}", EXIT_DATA)
    except EmptyInput:
        return _fail(f"no parseable records in {args.trace}", EXIT_DATA)
    target = out / "workload.csv"
    target.write_text(series.to_csv(), encoding="utf-8")
    print(f"wrote {target} ({len(series)} intervals, {len(records)} records, {skipped} skipped)")
    return EXIT_OK


def cmd_train(args) -> int:
    out = _out_dir(args)
    scenario = _load_scenario_with_overrides(args)
    workloads = build_workloads(scenario)
    models = train_models(scenario, workloads)
    for name, model in models.items():
        forecast.save_model(model, out / f"model_{name}.ckpt")
        write_training_log(model, out / f"train_{name}.csv")
        print(f"{name}: final training mse {model.training_mse[-1]!r}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    scenario = _load_scenario_with_overrides(args)
    workloads = build_workloads(scenario)
    needed = models_needed(args.strategy)
    models = train_models(scenario, workloads) if needed else {}
    strategy = build_strategy(scenario, args.strategy, models)
    result = run_simulation(workloads.spliced, strategy, scenario.vm, scenario.sim)
    (out / f"result_{args.strategy}.csv").write_text(result.to_csv(), encoding="utf-8")
    (out / f"decisions_{args.strategy}.csv").write_text(
        "\n".join(strategy.audit) + "\n", encoding="utf-8"
    )
    print(
        f"{args.strategy}: {len(result)} intervals, peak {int(result.running_vms.max())} VMs, "
        f"cost {result.total_cost!r}"
    )
    return EXIT_OK


def cmd_compare(args) -> int:
    out = _out_dir(args)
    scenario = _load_scenario_with_overrides(args)
    results = run_compare(scenario, out)
    for name, result in results.items():
        print(f"{name}: peak {int(result.running_vms.max())} VMs, cost {result.total_cost!r}")
    print(f"wrote comparison artifacts to {out}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    params = forecast.init_params(args.hidden, rng)
    model = forecast.LstmModel(
        hidden_size=args.hidden,
        window_length=args.window,
        horizon=1,
        params=params,
        norm_lo=0.0,
        norm_hi=1.0,
    )
    window = rng.uniform(0.0, 1.0, size=args.window)
    target = float(rng.uniform(0.0, 1.0))
    err = forecast.gradient_check(model, window, target)
    print(f"max relative gradient error: {err!r}")
    return EXIT_OK if err < 1e-4 else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flashscale",
        description="Trace-driven auto-scaling comparison laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an access log into a demand-series CSV")
    p.add_argument("--trace", required=True, help="Common Log Format access log")
    p.add_argument("--interval", type=float, default=300.0, help="aggregation interval, seconds")
    p.add_argument("--cost", choices=("unit", "bytes"), default="unit")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="fit and checkpoint the scenario's forecasters")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("simulate", help="run one scaling strategy on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--strategy", required=True, choices=STRATEGY_NAMES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--interval", type=float, default=None)
    p.add_argument("--trace", default=None, help="override the scenario trace path")
    p.add_argument("--spike", default=None, help="override the scenario spike path")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run all four strategies and emit tables")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--interval", type=float, default=None)
    p.add_argument("--trace", default=None)
    p.add_argument("--spike", default=None)
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="finite-difference check of forecaster gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hidden", type=int, default=6)
    p.add_argument("--window", type=int, default=8)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except (IoFailure, EmptyInput, BadHitTrace) as exc:
        return _fail(str(exc), EXIT_DATA)
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}", EXIT_DATA)
    except ValueError as exc:
        return _fail(str(exc), EXIT_CONFIG)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
