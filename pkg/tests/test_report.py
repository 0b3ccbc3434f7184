from __future__ import annotations

import math

import numpy as np
import pytest

from flashscale.report import (
    GridMismatch,
    comparison_table,
    hourly_aggregate,
    percentile_nearest_rank,
    release_lag,
    summary,
)
from flashscale.sim import SimResult


def make_result(
    demand,
    running=None,
    rt=None,
    completed=None,
    cost=None,
    interval=300.0,
):
    n = len(demand)
    demand = np.asarray(demand, dtype=float)
    running = np.asarray(running if running is not None else np.ones(n), dtype=float)
    rt = np.asarray(rt if rt is not None else np.full(n, 400.0), dtype=float)
    completed = np.asarray(completed if completed is not None else demand, dtype=float)
    cost = np.asarray(cost if cost is not None else np.cumsum(np.ones(n)), dtype=float)
    return SimResult(
        start_time=0.0,
        interval=interval,
        demand=demand,
        running_vms=running,
        booting_vms=np.zeros(n),
        avg_response_ms=rt,
        completed=completed,
        backlog=np.zeros(n),
        sla_violated=(rt > 1200).astype(float),
        cost_cumulative=cost,
    )


class TestComparisonTable:
    def test_single_strategy_echo(self):
        result = make_result([1, 2, 3], running=[4, 5, 6])
        csv = comparison_table({"solo": result}, "running_vms")
        lines = csv.splitlines()
        assert lines[0] == "time,solo"
        assert lines[1] == "0,4.0"
        assert lines[3] == "2,6.0"

    def test_grid_mismatch(self):
        a = make_result([1, 2, 3])
        b = make_result([1, 2, 3, 4])
        with pytest.raises(GridMismatch):
            comparison_table({"a": a, "b": b}, "running_vms")

    def test_column_order_preserved(self):
        # Layout fixture: strategy columns appear in insertion order
        # and the hour row carries one value per strategy. The values
        # here are only a formatting probe.
        per_hour = 12
        n = 226 * per_hour
        rows = {}
        for name, vms in (
            ("first", 352), ("second", 510), ("kanagala", 119), ("hasan", 40),
        ):
            running = np.ones(n)
            running[224 * per_hour : 225 * per_hour] = vms
            rows[name] = make_result(np.ones(n), running=running)
        csv = comparison_table(rows, "running_vms", window=(220 * per_hour, n), hourly=True)
        lines = csv.splitlines()
        assert lines[0] == "time,first,second,kanagala,hasan"
        hour224 = [line for line in lines if line.startswith("224,")][0]
        assert hour224 == "224,352.0,510.0,119.0,40.0"

    def test_hourly_rules_hand_fixture(self):
        # 3 hours at 12 intervals each with known aggregates
        per_hour = 12
        rt = np.concatenate([np.full(12, 600.0), np.full(12, 1200.0), np.full(12, 300.0)])
        running = np.arange(36.0)
        completed = np.ones(36) * 2
        result = make_result(np.ones(36), running=running, rt=rt, completed=completed)
        assert list(hourly_aggregate(rt, per_hour, "mean")) == [600.0, 1200.0, 300.0]
        assert list(hourly_aggregate(running, per_hour, "last")) == [11.0, 23.0, 35.0]
        assert list(hourly_aggregate(completed, per_hour, "sum")) == [24.0, 24.0, 24.0]
        csv = comparison_table({"s": result}, "avg_response_ms", hourly=True)
        assert csv.splitlines()[1:] == ["0,600.0", "1,1200.0", "2,300.0"]

    def test_window_applied(self):
        result = make_result([1, 2, 3, 4, 5], running=[10, 20, 30, 40, 50])
        csv = comparison_table({"s": result}, "running_vms", window=(1, 4))
        assert csv.splitlines()[1:] == ["1,20.0", "2,30.0", "3,40.0"]

    def test_unknown_metric(self):
        with pytest.raises(KeyError):
            comparison_table({"s": make_result([1.0])}, "nonsense")


class TestPercentile:
    def test_20_value_fixture_matches_sort_oracle(self):
        rng = np.random.default_rng(8)
        values = list(rng.uniform(0, 1000, size=20))
        # nearest-rank oracle: ceil(0.95 * 20) = 19th smallest
        expected = sorted(values)[int(math.ceil(0.95 * 20)) - 1]
        assert percentile_nearest_rank(values, 95.0) == expected

    def test_single_value(self):
        assert percentile_nearest_rank([7.0], 95.0) == 7.0

    def test_p50_of_small_set(self):
        assert percentile_nearest_rank([3.0, 1.0, 2.0], 50.0) == 2.0


class TestReleaseLag:
    def test_hand_constructed_lag(self):
        # spike occupies bins 10..14; fleet stands down at bin 20
        demand = np.ones(30)
        demand[10:15] = 100.0
        running = np.full(30, 5.0)
        running[10:20] = 50.0
        running[20:] = 5.0
        result = make_result(demand, running=running)
        # pre-spike mean 5 -> threshold 6; first below at 20; lag 20 - 14
        assert release_lag(result) == 6

    def test_never_standing_down_is_censored(self):
        demand = np.ones(20)
        demand[10:12] = 100.0
        running = np.full(20, 5.0)
        running[10:] = 50.0
        result = make_result(demand, running=running)
        assert release_lag(result) == 20 - 11

    def test_immediate_release(self):
        demand = np.ones(10)
        demand[5] = 100.0
        running = np.full(10, 3.0)
        result = make_result(demand, running=running)
        assert release_lag(result) == 0


class TestSummary:
    def test_constant_workload_no_violations(self):
        result = make_result(np.ones(20), rt=np.full(20, 500.0))
        s = summary(result, slo_ms=1200.0)
        assert s["sla_violation_pct"] == 0.0
        assert s["mean_rt"] == 500.0
        assert s["p95_rt"] == 500.0

    def test_cost_passthrough(self):
        result = make_result(np.ones(12), cost=np.cumsum(np.full(12, 0.25)))
        assert summary(result, 1200.0)["total_cost"] == pytest.approx(3.0)

    def test_violation_percentage(self):
        rt = np.array([500.0] * 15 + [2000.0] * 5)
        result = make_result(np.ones(20), rt=rt)
        assert summary(result, 1200.0)["sla_violation_pct"] == pytest.approx(25.0)

    def test_window_restricts_rt_stats(self):
        rt = np.array([500.0] * 10 + [3000.0] * 10)
        result = make_result(np.ones(20), rt=rt)
        s = summary(result, 1200.0, window=(0, 10))
        assert s["mean_rt"] == 500.0
        assert s["sla_violation_pct"] == 0.0

    def test_permutation_stable_for_order_free_metrics(self):
        rng = np.random.default_rng(5)
        rt = rng.uniform(100, 2000, size=40)
        shuffled = rt.copy()
        rng.shuffle(shuffled)
        a = summary(make_result(np.ones(40), rt=rt), 1200.0)
        b = summary(make_result(np.ones(40), rt=shuffled), 1200.0)
        for key in ("mean_rt", "p95_rt", "sla_violation_pct"):
            assert a[key] == pytest.approx(b[key])

    def test_peak_vms(self):
        result = make_result(np.ones(6), running=[1, 9, 4, 2, 1, 1])
        assert summary(result, 1200.0)["peak_vms"] == 9.0
