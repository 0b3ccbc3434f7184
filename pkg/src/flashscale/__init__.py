"""flashscale: trace-driven laboratory for predictive VM auto-scaling.

The package turns raw HTTP access logs into CPU-demand series, trains
small LSTM forecasters on them, and replays the demand through a
deterministic VM-fleet simulator under several scaling strategies
(dual-LSTM, single-LSTM, double-exponential-smoothing thresholds, and a
fixed-step reactive scaler) so the strategies can be compared on VM
counts, response time, SLA violations, and cost.
"""

from flashscale.traces import (
    HitSeries,
    LogRecord,
    WorkloadSeries,
    aggregate_demand,
    load_trace,
    parse_clf_line,
    splice_slashdot,
)
from flashscale.forecast import (
    LstmModel,
    MapeAccumulator,
    SlidingWindow,
    TrainConfig,
    gradient_check,
    lstm_forward,
    lstm_train,
    make_windows,
    mape,
)
from flashscale.scaling import (
    ModelChoice,
    ScalerState,
    ScalingAction,
    ThresholdConfig,
    Thresholds,
    compute_thresholds,
    decide,
    median_absolute_deviation,
    plan_capacity,
    select_model,
)
from flashscale.sim import SimResult, VmSpec, response_time, run_simulation

__version__ = "0.1.0"

__all__ = [
    "HitSeries",
    "LogRecord",
    "WorkloadSeries",
    "aggregate_demand",
    "load_trace",
    "parse_clf_line",
    "splice_slashdot",
    "LstmModel",
    "MapeAccumulator",
    "SlidingWindow",
    "TrainConfig",
    "gradient_check",
    "lstm_forward",
    "lstm_train",
    "make_windows",
    "mape",
    "ModelChoice",
    "ScalerState",
    "ScalingAction",
    "ThresholdConfig",
    "Thresholds",
    "compute_thresholds",
    "decide",
    "median_absolute_deviation",
    "plan_capacity",
    "select_model",
    "SimResult",
    "VmSpec",
    "response_time",
    "run_simulation",
]
