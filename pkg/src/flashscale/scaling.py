"""Adaptive-threshold scaling decisions with hysteresis timers.

The decision engine compares predicted utilization against three
thresholds derived from the Median Absolute Deviation of recent
utilization history (upper, slightly-below-upper, lower). Crossing the
upper threshold scales up immediately; the middle band and the lower
band require a dwell of consecutive observations (tick timers) before
acting. VM counts come from the gap between predicted demand and
provisioned capacity, never from fixed increments.

Two step drivers are provided: a dual-forecaster step that routes to
whichever of two predictors currently has the lower windowed MAPE, and
a single-forecaster step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from flashscale.forecast import MapeAccumulator


class EmptyInput(ValueError):
    """History is empty where at least one observation is required."""


# Thresholds are clamped here so a huge MAD cannot push them to zero
# or below, which would make scale-down unreachable.
THRESHOLD_FLOOR = 0.05


def median_absolute_deviation(values: Sequence[float]) -> float:
    """Median of absolute deviations from the median.

    Even-length medians are the mean of the two central order
    statistics (numpy convention).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("MAD of empty history")
    med = float(np.median(arr))
    return float(np.median(np.abs(arr - med)))


@dataclass(frozen=True)
class ThresholdConfig:
    """Constants for threshold adaptation and dwell behavior.

    ``c1 < c2 < c3`` weight the MAD in the three threshold equations;
    ``scaling_delay`` is the dwell (in decision ticks) before the
    middle or lower band acts; thresholds refresh every
    ``recompute_period`` decisions from the last ``mad_window``
    utilization observations.
    """

    c1: float = 0.5
    c2: float = 1.0
    c3: float = 4.0
    scaling_delay: int = 2
    recompute_period: int = 6
    mad_window: int = 288
    mape_window: int = 24  # accuracy-routing window of the dual strategy

    def __post_init__(self):
        if not (0 < self.c1 < self.c2 < self.c3):
            raise ValueError("need 0 < c1 < c2 < c3")
        if self.scaling_delay < 1 or self.recompute_period < 1 or self.mad_window < 1:
            raise ValueError("delays, periods, and windows must be >= 1")
        if self.mape_window < 1:
            raise ValueError("mape_window must be >= 1")


@dataclass(frozen=True)
class Thresholds:
    thr_u: float
    thr_bu: float
    thr_l: float

    def __post_init__(self):
        if not self.thr_l <= self.thr_bu <= self.thr_u <= 1.0:
            raise ValueError(f"threshold ordering violated: {self}")


def compute_thresholds(util_history: Sequence[float], cfg: ThresholdConfig) -> Thresholds:
    """Derive the three utilization thresholds from history dispersion.

    thr_u = 1 - c1 * MAD, thr_bu = 1 - c2 * MAD, thr_l = 1 - c3 * MAD,
    each clamped into [THRESHOLD_FLOOR, 1]. A constant history (MAD 0)
    collapses all three to 1.
    """
    mad = median_absolute_deviation(util_history)

    def clamp(value: float) -> float:
        return min(1.0, max(THRESHOLD_FLOOR, value))

    return Thresholds(
        thr_u=clamp(1.0 - cfg.c1 * mad),
        thr_bu=clamp(1.0 - cfg.c2 * mad),
        thr_l=clamp(1.0 - cfg.c3 * mad),
    )


class Signal(enum.Enum):
    """Raw outcome of one decision step, before capacity sizing."""

    SCALE_UP = "scale_up"
    SCALE_DOWN = "scale_down"
    NONE = "none"


class ModelChoice(enum.Enum):
    NORMAL = "normal"
    SLASHDOT = "slashdot"


@dataclass(frozen=True)
class ScalingAction:
    """Sized scaling command: kind plus a VM count (count 0 for none)."""

    kind: str  # "scale_up" | "scale_down" | "no_action"
    count: int = 0

    def __post_init__(self):
        if self.kind in ("scale_up", "scale_down") and self.count < 1:
            raise ValueError("scale actions need count >= 1")
        if self.kind == "no_action" and self.count != 0:
            raise ValueError("no_action carries no count")


NO_ACTION = ScalingAction("no_action")


def scale_up(count: int) -> ScalingAction:
    return ScalingAction("scale_up", count)


def scale_down(count: int) -> ScalingAction:
    return ScalingAction("scale_down", count)


@dataclass
class ScalerState:
    """Mutable state carried across decision steps.

    The tick timers persist between invocations (resetting them every
    call would make the dwell counters unreachable); after any decision
    at most one of the two is nonzero.
    """

    thresholds: Thresholds = field(default_factory=lambda: Thresholds(1.0, 1.0, 1.0))
    tick_up_timer: int = 0
    tick_down_timer: int = 0
    mape_normal: MapeAccumulator = field(default_factory=MapeAccumulator)
    mape_slashdot: MapeAccumulator = field(default_factory=MapeAccumulator)
    cpu_ph1: list[float] = field(default_factory=list)
    cpu_ph2: list[float] = field(default_factory=list)
    cpu_h: list[float] = field(default_factory=list)
    steps: int = 0


def decide(
    state: ScalerState, predicted_util: float, cfg: ThresholdConfig
) -> tuple[Signal, ScalerState]:
    """One pass of the three-threshold decision branch structure.

    Above thr_u: immediate scale-up, both timers reset. In
    (thr_bu, thr_u]: the up timer increments and scale-up fires once it
    exceeds ``scaling_delay``. Below thr_l: mirrored with the down
    timer. The middle band resets both timers. Comparisons are strict,
    matching the branch structure exactly; dwell-band fires do not
    reset the counting timer (repeated signals are harmless because
    capacity sizing is gap-based).
    """
    thr = state.thresholds
    signal = Signal.NONE
    if predicted_util > thr.thr_u:
        signal = Signal.SCALE_UP
        state.tick_down_timer = 0
        state.tick_up_timer = 0
    elif predicted_util > thr.thr_bu:
        state.tick_down_timer = 0
        state.tick_up_timer += 1
        if state.tick_up_timer > cfg.scaling_delay:
            signal = Signal.SCALE_UP
    elif predicted_util < thr.thr_l:
        state.tick_up_timer = 0
        state.tick_down_timer += 1
        if state.tick_down_timer > cfg.scaling_delay:
            signal = Signal.SCALE_DOWN
    else:
        state.tick_down_timer = 0
        state.tick_up_timer = 0
    return signal, state


def select_model(mape_normal: float, mape_slashdot: float) -> ModelChoice:
    """Route to whichever forecaster tracks recent demand better.

    Ties go to the flash-crowd model (the safer choice under surge).
    """
    if mape_normal < mape_slashdot:
        return ModelChoice.NORMAL
    return ModelChoice.SLASHDOT


def plan_capacity(
    predicted_demand: float,
    provisioned_vms: int,
    vm_capacity: float,
    min_vms: int,
    max_vms: int,
    target_util: float = 0.7,
) -> int:
    """Signed VM delta closing the gap between prediction and fleet.

    Target fleet size is ``ceil(predicted / (capacity * target_util))``
    clamped to [min_vms, max_vms]; the return value is target minus
    provisioned. The small epsilon keeps float noise in the ratio from
    inflating the ceiling.
    """
    if vm_capacity <= 0 or not 0 < target_util <= 1:
        raise ValueError("vm_capacity and target_util must be positive")
    if not 1 <= min_vms <= max_vms:
        raise ValueError("need 1 <= min_vms <= max_vms")
    ratio = max(0.0, predicted_demand) / (vm_capacity * target_util)
    target = math.ceil(ratio - 1e-12)
    target = min(max_vms, max(min_vms, target))
    return target - provisioned_vms


@dataclass(frozen=True)
class FleetInfo:
    """Snapshot of fleet capacity the decision step scales against."""

    running: int
    booting: int
    vm_capacity: float
    min_vms: int
    max_vms: int
    target_util: float = 0.7

    @property
    def provisioned(self) -> int:
        # Booting VMs count: capacity already ordered must not be
        # re-ordered on every tick of the startup delay.
        return self.running + self.booting


Predictor = Callable[[np.ndarray], float]

# Every strategy writes decision audit rows in this layout so runs can
# be diffed across strategies.
AUDIT_HEADER = "t,predicted,thr_u,thr_bu,thr_l,chosen_model,action,count,tick_up,tick_down"


def audit_row(
    t: int,
    predicted: float,
    thresholds: Thresholds,
    chosen_model: str,
    action: ScalingAction,
    tick_up: int = 0,
    tick_down: int = 0,
) -> str:
    return (
        f"{t},{float(predicted)!r},{thresholds.thr_u!r},{thresholds.thr_bu!r},"
        f"{thresholds.thr_l!r},{chosen_model},{action.kind},{action.count},"
        f"{tick_up},{tick_down}"
    )


def _refresh_thresholds(state: ScalerState, cfg: ThresholdConfig) -> None:
    if state.steps % cfg.recompute_period == 0 and state.cpu_h:
        state.thresholds = compute_thresholds(state.cpu_h[-cfg.mad_window :], cfg)


def _sized_action(signal: Signal, delta: int) -> ScalingAction:
    if signal is Signal.SCALE_UP and delta > 0:
        return scale_up(delta)
    if signal is Signal.SCALE_DOWN and delta < 0:
        return scale_down(-delta)
    return NO_ACTION


def autoscale_step_dual(
    state: ScalerState,
    demand_history: Sequence[float],
    predictors: tuple[Predictor, Predictor],
    win,
    fleet: FleetInfo,
    cfg: ThresholdConfig,
) -> tuple[ScalingAction, ScalerState, ModelChoice]:
    """One decision tick of the dual-forecaster strategy.

    Both predictors forecast ``win.horizon`` steps ahead from the
    latest window; both prediction histories and MAPE windows update
    against the newly observed demand; the better model's prediction
    (as utilization of provisioned capacity) drives the threshold
    decision, and a fired signal is sized by the demand/capacity gap.

    ``predictors`` are callables from window to predicted demand, e.g.
    ``functools.partial(lstm_forward, model)``. Returns the action, the
    updated state, and which model was routed to.
    """
    from flashscale.forecast import SeriesTooShort

    if len(demand_history) < win.length:
        raise SeriesTooShort(
            f"need {win.length} observations, have {len(demand_history)}"
        )
    window = np.asarray(demand_history[-win.length :], dtype=np.float64)
    actual_now = float(demand_history[-1])

    # Score the prediction made `horizon` ticks ago against what arrived.
    lag = win.horizon
    if len(state.cpu_ph1) >= lag:
        state.mape_normal.update(actual_now, state.cpu_ph1[-lag])
        state.mape_slashdot.update(actual_now, state.cpu_ph2[-lag])

    p_normal = float(predictors[0](window))
    p_slashdot = float(predictors[1](window))
    state.cpu_ph1.append(p_normal)
    state.cpu_ph2.append(p_slashdot)

    m_normal = state.mape_normal.value()
    m_slashdot = state.mape_slashdot.value()
    if not (math.isfinite(m_normal) or math.isfinite(m_slashdot)):
        choice = ModelChoice.NORMAL  # no evidence yet; assume calm traffic
    else:
        choice = select_model(m_normal, m_slashdot)
    predicted = p_normal if choice is ModelChoice.NORMAL else p_slashdot

    capacity = fleet.provisioned * fleet.vm_capacity
    state.cpu_h.append(min(1.0, actual_now / (fleet.running * fleet.vm_capacity)))
    _refresh_thresholds(state, cfg)
    state.steps += 1

    signal, state = decide(state, predicted / capacity, cfg)
    delta = plan_capacity(
        predicted, fleet.provisioned, fleet.vm_capacity,
        fleet.min_vms, fleet.max_vms, fleet.target_util,
    )
    return _sized_action(signal, delta), state, choice


def autoscale_step_single(
    state: ScalerState,
    demand_history: Sequence[float],
    predictor: Predictor,
    win,
    fleet: FleetInfo,
    cfg: ThresholdConfig,
) -> tuple[ScalingAction, ScalerState]:
    """One decision tick of the single-forecaster strategy.

    Identical to the dual step with one prediction history and no
    routing.
    """
    from flashscale.forecast import SeriesTooShort

    if len(demand_history) < win.length:
        raise SeriesTooShort(
            f"need {win.length} observations, have {len(demand_history)}"
        )
    window = np.asarray(demand_history[-win.length :], dtype=np.float64)
    actual_now = float(demand_history[-1])

    lag = win.horizon
    if len(state.cpu_ph1) >= lag:
        state.mape_normal.update(actual_now, state.cpu_ph1[-lag])

    predicted = float(predictor(window))
    state.cpu_ph1.append(predicted)

    capacity = fleet.provisioned * fleet.vm_capacity
    state.cpu_h.append(min(1.0, actual_now / (fleet.running * fleet.vm_capacity)))
    _refresh_thresholds(state, cfg)
    state.steps += 1

    signal, state = decide(state, predicted / capacity, cfg)
    delta = plan_capacity(
        predicted, fleet.provisioned, fleet.vm_capacity,
        fleet.min_vms, fleet.max_vms, fleet.target_util,
    )
    return _sized_action(signal, delta), state
