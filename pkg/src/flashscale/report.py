"""Comparison tables and summary metrics over simulation results.

Pure transforms: every cell of a table equals the corresponding
per-interval field of a SimResult or its declared hourly aggregation
(mean for response time, last value for gauge-like columns, sum for
counted columns).
"""

from __future__ import annotations

import math

import numpy as np

from flashscale.sim import SimResult


class GridMismatch(ValueError):
    """Results do not share an interval grid and cannot be tabulated."""


# How each column folds from intervals to hours.
_HOURLY_RULE = {
    "running_vms": "last",
    "booting_vms": "last",
    "avg_response_ms": "mean",
    "completed": "sum",
    "demand": "sum",
    "backlog": "last",
    "sla_violated": "sum",
    "cost_cumulative": "last",
}


def _column(result: SimResult, metric: str) -> np.ndarray:
    if metric not in _HOURLY_RULE:
        raise KeyError(f"unknown metric {metric!r}")
    return getattr(result, metric)


def hourly_aggregate(values: np.ndarray, per_hour: int, rule: str) -> np.ndarray:
    """Fold interval samples into hours; a trailing partial hour folds too."""
    n_hours = math.ceil(len(values) / per_hour)
    out = np.zeros(n_hours)
    for h in range(n_hours):
        chunk = values[h * per_hour : (h + 1) * per_hour]
        if rule == "mean":
            out[h] = chunk.mean()
        elif rule == "sum":
            out[h] = chunk.sum()
        else:
            out[h] = chunk[-1]
    return out


def comparison_table(
    results: dict[str, SimResult],
    metric: str,
    window: tuple[int, int] | None = None,
    hourly: bool = False,
) -> str:
    """Tabulate one metric across strategies as ``time,<s1>,<s2>,...`` CSV.

    Strategy columns appear in dict insertion order. ``window`` is a
    half-open (start, end) interval-index range applied before any
    hourly fold; with ``hourly`` the time column is the hour index and
    the interval grid must divide evenly into hours.
    """
    if not results:
        raise GridMismatch("no results to tabulate")
    grids = {(r.start_time, r.interval, len(r)) for r in results.values()}
    if len(grids) != 1:
        raise GridMismatch(f"results on different grids: {sorted(grids)}")
    interval = next(iter(results.values())).interval

    columns = {}
    for name, result in results.items():
        values = _column(result, metric)
        if window is not None:
            values = values[window[0] : window[1]]
        columns[name] = values

    if hourly:
        per_hour = 3600.0 / interval
        if abs(per_hour - round(per_hour)) > 1e-9:
            raise GridMismatch(f"interval {interval}s does not divide an hour")
        per_hour = int(round(per_hour))
        rule = _HOURLY_RULE[metric]
        columns = {name: hourly_aggregate(v, per_hour, rule) for name, v in columns.items()}

    offset = 0 if window is None else window[0]
    header = "time," + ",".join(columns)
    lines = [header]
    length = len(next(iter(columns.values())))
    for i in range(length):
        t = (offset // int(round(3600.0 / interval))) + i if hourly else offset + i
        cells = ",".join(repr(float(v[i])) for v in columns.values())
        lines.append(f"{t},{cells}")
    return "\n".join(lines) + "\n"


def percentile_nearest_rank(values, q: float) -> float:
    """Nearest-rank percentile: the ceil(q * n)-th smallest value."""
    ordered = sorted(float(v) for v in values)
    if not ordered:
        raise ValueError("percentile of empty data")
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


def release_lag(result: SimResult) -> int:
    """Intervals from the demand peak's end until the fleet stands down.

    The spike region is where demand is at least half its maximum; the
    fleet has stood down once running VMs drop below 120% of their
    pre-spike mean. Returns the remaining run length if that never
    happens (a censored lag).
    """
    demand = result.demand
    spike = demand >= 0.5 * float(demand.max())
    spike_start = int(np.argmax(spike))
    spike_end = int(len(spike) - 1 - np.argmax(spike[::-1]))
    if spike_start > 0:
        pre_mean = float(result.running_vms[:spike_start].mean())
    else:
        pre_mean = float(result.running_vms[0])
    threshold = 1.2 * pre_mean
    for k in range(spike_end, len(demand)):
        if result.running_vms[k] < threshold:
            return k - spike_end
    return len(demand) - spike_end


def summary(
    result: SimResult, slo_ms: float, window: tuple[int, int] | None = None
) -> dict[str, float]:
    """Headline metrics for one run.

    ``window`` (half-open interval range) restricts the response-time,
    SLA, and peak statistics; cost and release lag always cover the
    whole run.
    """
    sl = slice(*window) if window is not None else slice(None)
    rt = result.avg_response_ms[sl]
    if len(rt) == 0:
        raise ValueError("empty result window")
    return {
        "mean_rt": float(rt.mean()),
        "p95_rt": percentile_nearest_rank(rt, 95.0),
        "sla_violation_pct": float(100.0 * np.mean(rt > slo_ms)),
        "total_cost": result.total_cost,
        "peak_vms": float(result.running_vms[sl].max()),
        "release_lag": float(release_lag(result)),
    }
