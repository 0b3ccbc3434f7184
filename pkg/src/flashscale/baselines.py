"""Reference scaling strategies the forecasting scalers are compared to.

Two reactive baselines:

* ``FixedStepScaler`` adds or removes a fixed number of VMs at a time.
  It scales up after utilization stays above the upper bound for a
  dwell period, and releases when utilization drops below the lower
  bound or the recent trend turns down, terminating marked VMs one
  mark-delay later. The fixed increment is what limits it during a
  flash crowd.
* ``DesThresholdScaler`` forecasts utilization with double exponential
  smoothing (level plus trend) at the VM turnaround horizon, scales up
  as soon as the forecast crosses its upper bound, and scales down only
  after the forecast sits below the lower bound for a dwell, sizing
  both directions from the demand/capacity gap.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from flashscale.scaling import (
    AUDIT_HEADER,
    NO_ACTION,
    FleetInfo,
    ScalingAction,
    Thresholds,
    audit_row,
    plan_capacity,
    scale_down,
    scale_up,
)


class InsufficientHistory(ValueError):
    """Double exponential smoothing needs at least two observations."""


def double_exponential_smoothing(
    series: Sequence[float], alpha: float, beta: float, horizon: int = 1
) -> float:
    """Holt's linear forecast ``horizon`` steps past the series end.

    Level and trend follow
    s_t = alpha * x_t + (1 - alpha) * (s_{t-1} + b_{t-1}) and
    b_t = beta * (s_t - s_{t-1}) + (1 - beta) * b_{t-1}, initialized
    with s_1 = x_1 and b_1 = x_2 - x_1.
    """
    if not 0 < alpha <= 1 or not 0 < beta <= 1:
        raise ValueError("alpha and beta must be in (0, 1]")
    if len(series) < 2:
        raise InsufficientHistory("need at least 2 observations")
    level = float(series[0])
    trend = float(series[1]) - float(series[0])
    for x in series[1:]:
        prev_level = level
        level = alpha * float(x) + (1.0 - alpha) * (level + trend)
        trend = beta * (level - prev_level) + (1.0 - beta) * trend
    return level + horizon * trend


def baseline_des_threshold(
    util_history: Sequence[float],
    alpha: float,
    beta: float,
    dwell: int,
    fleet: FleetInfo,
    upper: float = 0.8,
    lower: float = 0.3,
    up_dwell: int = 3,
    horizon: int = 2,
    above_streak: int = 0,
    below_streak: int = 0,
) -> tuple[ScalingAction, float, int, int]:
    """One smoothed-forecast threshold decision.

    Forecasts utilization ``horizon`` steps out (the VM turnaround
    time), then applies dwell-gated bound crossings with gap-based
    sizing. Returns (action, forecast, above_streak, below_streak); the
    streaks reset when an action fires so capacity moves at most once
    per dwell.
    """
    if len(util_history) < 2:
        raise InsufficientHistory("need at least 2 observations")
    forecast = double_exponential_smoothing(util_history, alpha, beta, horizon)
    capacity = fleet.provisioned * fleet.vm_capacity
    predicted_demand = max(0.0, forecast) * capacity
    action = NO_ACTION
    if forecast > upper:
        below_streak = 0
        above_streak += 1
        if above_streak > up_dwell:
            above_streak = 0
            delta = plan_capacity(
                predicted_demand, fleet.provisioned, fleet.vm_capacity,
                fleet.min_vms, fleet.max_vms, fleet.target_util,
            )
            if delta > 0:
                action = scale_up(delta)
    elif forecast < lower:
        above_streak = 0
        below_streak += 1
        if below_streak > dwell:
            below_streak = 0
            delta = plan_capacity(
                predicted_demand, fleet.provisioned, fleet.vm_capacity,
                fleet.min_vms, fleet.max_vms, fleet.target_util,
            )
            if delta < 0:
                action = scale_down(-delta)
    else:
        above_streak = 0
        below_streak = 0
    return action, forecast, above_streak, below_streak


def baseline_fixed_step(
    observed_util: float,
    up_streak: int,
    trend_down: bool,
    upper: float,
    lower: float,
    step_size: int,
    dwell: int,
) -> tuple[ScalingAction, int]:
    """Fixed-increment reactive decision for one observation.

    Returns the action and the updated consecutive-above-upper streak.
    Release wins over growth: a down-trend or a drop below the lower
    bound releases ``step_size`` VMs even while backlog remains, which
    is exactly the behavior that costs this policy during spikes.
    """
    if step_size < 1:
        raise ValueError("step_size must be >= 1")
    if observed_util > upper:
        up_streak += 1
    else:
        up_streak = 0
    if observed_util < lower or trend_down:
        return scale_down(step_size), 0
    if up_streak >= dwell:
        return scale_up(step_size), 0
    return NO_ACTION, up_streak


@dataclass(frozen=True)
class FixedStepConfig:
    step_size: int = 11
    upper: float = 0.8
    lower: float = 0.15
    dwell: int = 12
    trend_window: int = 6
    trend_drop: float = 0.1
    down_cooldown: int = 6  # minimum intervals between release marks
    mark_delay: int = 1  # intervals between marking a VM and terminating it


class FixedStepScaler:
    """Reactive fixed-increment scaler with mark-then-terminate releases.

    The load trend is measured on raw demand (utilization would be
    confounded by the scaler's own fleet changes): trend is down when
    the mean of the last ``trend_window`` demands sits ``trend_drop``
    below the mean of the preceding window.
    """

    name = "fixed-step"

    def __init__(self, cfg: FixedStepConfig):
        self.cfg = cfg
        self.demands: deque[float] = deque(maxlen=2 * cfg.trend_window)
        self.up_streak = 0
        self.cooldown = 0
        self.pending: list[tuple[int, int]] = []  # (due_t, count)
        self.audit: list[str] = [AUDIT_HEADER]

    def _trend_down(self) -> bool:
        w = self.cfg.trend_window
        if len(self.demands) < 2 * w:
            return False
        values = list(self.demands)
        recent = sum(values[w:]) / w
        earlier = sum(values[:w]) / w
        return recent < earlier * (1.0 - self.cfg.trend_drop)

    def observe(self, t: int, demand: float, fleet: FleetInfo) -> ScalingAction:
        # A saturated fleet meters as fully busy; offered load beyond
        # capacity is not observable through utilization.
        util = min(1.0, demand / (fleet.running * fleet.vm_capacity))
        self.demands.append(demand)
        if self.cooldown > 0:
            self.cooldown -= 1

        due = sum(count for due_t, count in self.pending if due_t <= t)
        self.pending = [(due_t, count) for due_t, count in self.pending if due_t > t]
        if due > 0:
            action = scale_down(due)
            self.up_streak = 0
        else:
            action, self.up_streak = baseline_fixed_step(
                util, self.up_streak, self._trend_down(),
                self.cfg.upper, self.cfg.lower, self.cfg.step_size, self.cfg.dwell,
            )
            if action.kind == "scale_down":
                if self.cooldown == 0:
                    # Mark now, terminate after the mark delay.
                    self.pending.append((t + self.cfg.mark_delay, action.count))
                    self.cooldown = self.cfg.down_cooldown
                action = NO_ACTION
        bounds = Thresholds(self.cfg.upper, self.cfg.upper, self.cfg.lower)
        self.audit.append(audit_row(t, util, bounds, "", action, self.up_streak, 0))
        return action


@dataclass(frozen=True)
class DesConfig:
    alpha: float = 0.25
    beta: float = 0.05
    upper: float = 0.8
    lower: float = 0.3
    up_dwell: int = 3  # the pre-specified duration above the bound before acting
    down_dwell: int = 18
    horizon: int = 2  # VM turnaround time in intervals
    history: int = 96


class DesThresholdScaler:
    """Forecast-threshold scaler built on double exponential smoothing.

    Both directions are dwell-gated: the forecast must sit past a bound
    for a sustained run of observations before capacity moves, which is
    what makes this policy late during a flash crowd and slow to stand
    down afterwards.
    """

    name = "des"

    def __init__(self, cfg: DesConfig):
        self.cfg = cfg
        self.utils: deque[float] = deque(maxlen=cfg.history)
        self.above_streak = 0
        self.below_streak = 0
        self.audit: list[str] = [AUDIT_HEADER]

    def observe(self, t: int, demand: float, fleet: FleetInfo) -> ScalingAction:
        # A saturated fleet meters as fully busy; offered load beyond
        # capacity is not observable through utilization, so the
        # forecast climbs step by step under overload instead of
        # jumping straight to the offered load. One move per dwell:
        # ordered VMs must arrive and the system stabilize before the
        # next re-evaluation.
        util = min(1.0, demand / (fleet.running * fleet.vm_capacity))
        self.utils.append(util)
        action = NO_ACTION
        forecast = util
        if len(self.utils) >= 2:
            action, forecast, self.above_streak, self.below_streak = baseline_des_threshold(
                list(self.utils), self.cfg.alpha, self.cfg.beta, self.cfg.down_dwell,
                fleet, upper=self.cfg.upper, lower=self.cfg.lower,
                up_dwell=self.cfg.up_dwell, horizon=self.cfg.horizon,
                above_streak=self.above_streak, below_streak=self.below_streak,
            )
        bounds = Thresholds(self.cfg.upper, self.cfg.upper, self.cfg.lower)
        self.audit.append(
            audit_row(t, forecast, bounds, "", action, self.above_streak, self.below_streak)
        )
        return action
