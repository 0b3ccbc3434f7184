"""Forecast-driven scaling strategies for the fleet simulator.

Adapts the dual- and single-forecaster decision steps to the
simulator's observe() interface: demand history accumulates here, the
step functions run once the sliding window is filled, and every
decision is appended to an audit log.
"""

from __future__ import annotations

from functools import partial

from flashscale.forecast import LstmModel, MapeAccumulator, SlidingWindow, lstm_forward
from flashscale.scaling import (
    AUDIT_HEADER,
    NO_ACTION,
    FleetInfo,
    ModelChoice,
    Predictor,
    ScalerState,
    ScalingAction,
    ThresholdConfig,
    audit_row,
    autoscale_step_dual,
    autoscale_step_single,
)


def as_predictor(model) -> Predictor:
    """Accept an LstmModel or any window -> demand callable."""
    if isinstance(model, LstmModel):
        return partial(lstm_forward, model)
    if callable(model):
        return model
    raise TypeError(f"cannot use {type(model).__name__} as a predictor")


class DualLstmScaler:
    """Two forecasters with online accuracy routing (the full method)."""

    name = "dual-lstm"

    def __init__(self, normal_model, slashdot_model, win: SlidingWindow, cfg: ThresholdConfig):
        self.predictors = (as_predictor(normal_model), as_predictor(slashdot_model))
        self.win = win
        self.cfg = cfg
        self.state = ScalerState(
            mape_normal=MapeAccumulator(cfg.mape_window),
            mape_slashdot=MapeAccumulator(cfg.mape_window),
        )
        self.history: list[float] = []
        self.choices: list[ModelChoice] = []
        self.audit: list[str] = [AUDIT_HEADER]

    def observe(self, t: int, demand: float, fleet: FleetInfo) -> ScalingAction:
        self.history.append(demand)
        if len(self.history) < self.win.length:
            return NO_ACTION
        action, self.state, choice = autoscale_step_dual(
            self.state, self.history, self.predictors, self.win, fleet, self.cfg
        )
        self.choices.append(choice)
        predicted = (
            self.state.cpu_ph1[-1] if choice is ModelChoice.NORMAL else self.state.cpu_ph2[-1]
        )
        self.audit.append(
            audit_row(
                t, predicted, self.state.thresholds, choice.value, action,
                self.state.tick_up_timer, self.state.tick_down_timer,
            )
        )
        return action


class SingleLstmScaler:
    """One forecaster feeding the same decision engine."""

    name = "single-lstm"

    def __init__(self, model, win: SlidingWindow, cfg: ThresholdConfig):
        self.predictor = as_predictor(model)
        self.win = win
        self.cfg = cfg
        self.state = ScalerState()
        self.history: list[float] = []
        self.audit: list[str] = [AUDIT_HEADER]

    def observe(self, t: int, demand: float, fleet: FleetInfo) -> ScalingAction:
        self.history.append(demand)
        if len(self.history) < self.win.length:
            return NO_ACTION
        action, self.state = autoscale_step_single(
            self.state, self.history, self.predictor, self.win, fleet, self.cfg
        )
        self.audit.append(
            audit_row(
                t, self.state.cpu_ph1[-1], self.state.thresholds, "", action,
                self.state.tick_up_timer, self.state.tick_down_timer,
            )
        )
        return action
