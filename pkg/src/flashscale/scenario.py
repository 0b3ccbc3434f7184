"""Scenario files: one JSON document that pins an entire experiment.

A scenario names the traces, the splice positions of the flash-crowd
spike, every model and scaler constant, and the seed, so a comparison
run is fully reproducible from the file alone. This module loads and
validates scenarios and provides the pipeline pieces the CLI composes:
workload construction, model training, strategy construction, and the
four-way comparison run with all of its output files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from flashscale.baselines import DesConfig, DesThresholdScaler, FixedStepConfig, FixedStepScaler
from flashscale.forecast import (
    LstmModel,
    SlidingWindow,
    TrainConfig,
    lstm_train,
    save_model,
)
from flashscale.report import comparison_table, summary
from flashscale.scaling import ThresholdConfig
from flashscale.sim import ConfigInvalid, SimConfig, SimResult, VmSpec, run_simulation
from flashscale.strategies import DualLstmScaler, SingleLstmScaler
from flashscale.traces import (
    WorkloadSeries,
    aggregate_demand,
    bytes_cost,
    load_hit_csv,
    load_trace,
    resample_hits,
    splice_slashdot,
    unit_cost,
)

STRATEGY_NAMES = ("dual-lstm", "single-lstm", "des", "fixed-step")


@dataclass(frozen=True)
class Splice:
    offset_hours: float
    cost_per_hit: float = 1.0


@dataclass(frozen=True)
class LstmSettings:
    hidden_size: int = 32
    window: int = 24
    horizon: int = 2
    epochs: int = 150
    learning_rate: float = 0.3
    train_fraction: float = 1.0

    def sliding_window(self) -> SlidingWindow:
        return SlidingWindow(length=self.window, horizon=self.horizon)

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=seed,
            train_fraction=self.train_fraction,
        )


@dataclass(frozen=True)
class SpikeTraining:
    tiles: int = 10
    amp_lo: float = 0.5
    amp_hi: float = 2.0


@dataclass(frozen=True)
class Scenario:
    seed: int
    interval_s: float
    trace: Path
    spike: Path
    splices: tuple[Splice, ...]
    train_hours: float
    cost_model: str = "unit"
    lstm: LstmSettings = field(default_factory=LstmSettings)
    spike_training: SpikeTraining = field(default_factory=SpikeTraining)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    vm: VmSpec = field(default_factory=lambda: VmSpec(capacity=4.0))
    sim: SimConfig = field(default_factory=SimConfig)
    des: DesConfig = field(default_factory=DesConfig)
    fixed_step: FixedStepConfig = field(default_factory=FixedStepConfig)
    spike_window_hours: tuple[float, float] = (221.0, 249.0)

    @property
    def intervals_per_hour(self) -> int:
        return int(round(3600.0 / self.interval_s))

    def hours_to_intervals(self, hours: float) -> int:
        return int(round(hours * 3600.0 / self.interval_s))

    @property
    def spike_window(self) -> tuple[int, int]:
        lo, hi = self.spike_window_hours
        return self.hours_to_intervals(lo), self.hours_to_intervals(hi)


def _take(raw: dict, key: str, cls, default):
    if key not in raw:
        return default
    try:
        return cls(**raw[key])
    except TypeError as exc:
        raise ConfigInvalid(f"bad {key!r} block: {exc}") from None


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file.

    Trace paths are resolved relative to the scenario file's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigInvalid(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"scenario is not valid JSON: {exc}") from None
    base = path.parent
    try:
        splices = tuple(Splice(**s) for s in raw.get("splices", []))
        scenario = Scenario(
            seed=int(raw.get("seed", 0)),
            interval_s=float(raw.get("interval_s", 300)),
            trace=base / raw["trace"],
            spike=base / raw["spike"],
            splices=splices,
            train_hours=float(raw["train_hours"]),
            cost_model=raw.get("cost_model", "unit"),
            lstm=_take(raw, "lstm", LstmSettings, LstmSettings()),
            spike_training=_take(raw, "slashdot_training", SpikeTraining, SpikeTraining()),
            thresholds=_take(raw, "thresholds", ThresholdConfig, ThresholdConfig()),
            vm=_take(raw, "vm", VmSpec, VmSpec(capacity=4.0)),
            sim=_take(raw, "sim", SimConfig, SimConfig()),
            des=_take(raw, "des", DesConfig, DesConfig()),
            fixed_step=_take(raw, "fixed_step", FixedStepConfig, FixedStepConfig()),
            spike_window_hours=tuple(raw.get("spike_window_hours", (221.0, 249.0))),
        )
    except KeyError as exc:
        raise ConfigInvalid(f"scenario missing required field {exc}") from None
    except (ValueError, TypeError) as exc:
        raise ConfigInvalid(str(exc)) from None
    if scenario.cost_model not in ("unit", "bytes"):
        raise ConfigInvalid(f"unknown cost_model {scenario.cost_model!r}")
    if scenario.interval_s <= 0:
        raise ConfigInvalid("interval_s must be positive")
    return scenario


@dataclass
class Workloads:
    base: WorkloadSeries
    spliced: WorkloadSeries
    spike_demand: np.ndarray  # one spike occurrence at scenario resolution
    skipped_lines: int
    train_intervals: int


def build_workloads(scenario: Scenario) -> Workloads:
    """Parse the traces and assemble base and spliced demand series."""
    cost = unit_cost if scenario.cost_model == "unit" else bytes_cost()
    with open(scenario.trace, "rb") as handle:
        records, skipped = load_trace(handle)
    base = aggregate_demand(records, scenario.interval_s, cost)
    spike = load_hit_csv(scenario.spike.read_text())
    spliced = base
    for splice in scenario.splices:
        offset = scenario.hours_to_intervals(splice.offset_hours)
        spliced = splice_slashdot(spliced, spike, offset, splice.cost_per_hit)
    spike_demand = resample_hits(spike, scenario.interval_s)
    train_intervals = min(scenario.hours_to_intervals(scenario.train_hours), len(base))
    return Workloads(
        base=base,
        spliced=spliced,
        spike_demand=spike_demand,
        skipped_lines=skipped,
        train_intervals=train_intervals,
    )


def tile_spike_corpus(
    spike_demand: np.ndarray, tiles: int, amp_lo: float, amp_hi: float, seed: int
) -> np.ndarray:
    """Training corpus for the flash-crowd model: the one observed
    spike day replicated with seeded random amplitudes."""
    rng = np.random.default_rng(seed)
    amps = rng.uniform(amp_lo, amp_hi, size=tiles)
    return np.concatenate([spike_demand * a for a in amps])


def train_models(scenario: Scenario, workloads: Workloads) -> dict[str, LstmModel]:
    """Fit the three forecasters a comparison run needs.

    ``normal`` sees the calm training region only, ``slashdot`` sees
    tiled spike days only, ``single`` sees the spliced training region.
    Seeds derive from the scenario seed so runs are reproducible.
    """
    win = scenario.lstm.sliding_window()
    n_train = workloads.train_intervals
    spike_cfg = scenario.spike_training
    corpus_slashdot = tile_spike_corpus(
        workloads.spike_demand, spike_cfg.tiles, spike_cfg.amp_lo, spike_cfg.amp_hi,
        scenario.seed,
    )
    h = scenario.lstm.hidden_size
    return {
        "normal": lstm_train(
            workloads.base.demand[:n_train], win,
            scenario.lstm.train_config(scenario.seed), hidden_size=h,
        ),
        "slashdot": lstm_train(
            corpus_slashdot, win,
            scenario.lstm.train_config(scenario.seed + 1), hidden_size=h,
        ),
        "single": lstm_train(
            workloads.spliced.demand[:n_train], win,
            scenario.lstm.train_config(scenario.seed + 2), hidden_size=h,
        ),
    }


def build_strategy(scenario: Scenario, name: str, models: dict[str, LstmModel]):
    win = scenario.lstm.sliding_window()
    if name == "dual-lstm":
        return DualLstmScaler(models["normal"], models["slashdot"], win, scenario.thresholds)
    if name == "single-lstm":
        return SingleLstmScaler(models["single"], win, scenario.thresholds)
    if name == "des":
        return DesThresholdScaler(scenario.des)
    if name == "fixed-step":
        return FixedStepScaler(scenario.fixed_step)
    raise ConfigInvalid(f"unknown strategy {name!r}; choose from {STRATEGY_NAMES}")


def models_needed(name: str) -> tuple[str, ...]:
    return {
        "dual-lstm": ("normal", "slashdot"),
        "single-lstm": ("single",),
    }.get(name, ())


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_training_log(model: LstmModel, path: Path) -> None:
    lines = ["epoch,mse"]
    lines += [f"{i},{mse!r}" for i, mse in enumerate(model.training_mse)]
    _write(path, "\n".join(lines) + "\n")


SUMMARY_HEADER = "strategy,mean_rt,p95_rt,sla_violation_pct,total_cost,peak_vms,release_lag"


def _summary_csv(results: dict[str, SimResult], slo_ms: float, window=None) -> str:
    lines = [SUMMARY_HEADER]
    for name, result in results.items():
        s = summary(result, slo_ms, window=window)
        lines.append(
            f"{name},{s['mean_rt']!r},{s['p95_rt']!r},{s['sla_violation_pct']!r},"
            f"{s['total_cost']!r},{s['peak_vms']!r},{s['release_lag']!r}"
        )
    return "\n".join(lines) + "\n"


def _dat_table(results: dict[str, SimResult], metric: str) -> str:
    """Gnuplot-friendly: whitespace-separated with a comment header."""
    names = list(results)
    lines = ["# t " + " ".join(names)]
    length = len(next(iter(results.values())))
    for t in range(length):
        cells = " ".join(repr(float(getattr(results[n], metric)[t])) for n in names)
        lines.append(f"{t} {cells}")
    return "\n".join(lines) + "\n"


def run_compare(scenario: Scenario, out_dir) -> dict[str, SimResult]:
    """Run all four strategies on the scenario and write every artifact.

    Outputs under ``out_dir``: per-strategy result and decision-audit
    CSVs, model checkpoints and training logs, hourly comparison tables
    for running VMs, response time, and completed requests over the
    spike window, gnuplot .dat files for the full run, full-run and
    spike-window summary tables, and an echo of the scenario.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workloads = build_workloads(scenario)
    models = train_models(scenario, workloads)

    for name, model in models.items():
        save_model(model, out / f"model_{name}.ckpt")
        write_training_log(model, out / f"train_{name}.csv")

    results: dict[str, SimResult] = {}
    for name in STRATEGY_NAMES:
        strategy = build_strategy(scenario, name, models)
        result = run_simulation(workloads.spliced, strategy, scenario.vm, scenario.sim)
        results[name] = result
        _write(out / f"result_{name}.csv", result.to_csv())
        _write(out / f"decisions_{name}.csv", "\n".join(strategy.audit) + "\n")

    window = scenario.spike_window
    for metric, stem in (
        ("running_vms", "table_running_vms"),
        ("avg_response_ms", "table_avg_response_ms"),
        ("completed", "table_completed"),
    ):
        _write(out / f"{stem}.csv", comparison_table(results, metric, window=window, hourly=True))
        _write(out / f"fig_{metric}.dat", _dat_table(results, metric))

    _write(out / "summary.csv", _summary_csv(results, scenario.sim.slo_ms))
    _write(out / "summary_spike_window.csv", _summary_csv(results, scenario.sim.slo_ms, window))
    echo = {
        "scenario": _scenario_echo(scenario),
        "skipped_log_lines": workloads.skipped_lines,
        "intervals": len(workloads.spliced),
    }
    _write(out / "scenario_echo.json", json.dumps(echo, indent=2, sort_keys=True) + "\n")
    return results


def _scenario_echo(scenario: Scenario) -> dict:
    echo = asdict(scenario)
    echo["trace"] = str(scenario.trace)
    echo["spike"] = str(scenario.spike)
    return echo
