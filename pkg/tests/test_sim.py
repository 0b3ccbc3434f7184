from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flashscale.scaling import NO_ACTION, scale_down, scale_up
from flashscale.sim import ConfigInvalid, SimConfig, VmSpec, response_time, run_simulation
from flashscale.traces import WorkloadSeries


class Scripted:
    """Replays a fixed list of actions, then holds still."""

    name = "scripted"

    def __init__(self, actions):
        self.actions = list(actions)

    def observe(self, t, demand, fleet):
        return self.actions[t] if t < len(self.actions) else NO_ACTION


def series(demand, interval=300.0):
    return WorkloadSeries(0.0, interval, np.asarray(demand, dtype=float))


SPEC = VmSpec(capacity=10.0, startup_delay=2, billing_quantum=4, cost_per_quantum=1.0)


class TestResponseTime:
    def test_idle_system_is_base(self):
        assert response_time(0.0, 100.0, 0.0, 250.0) == 250.0

    def test_half_load_doubles(self):
        assert response_time(50.0, 100.0, 0.0, 250.0) == 500.0

    def test_backlog_strictly_increases(self):
        low = response_time(50.0, 100.0, 10.0, 250.0)
        high = response_time(50.0, 100.0, 20.0, 250.0)
        assert high > low

    def test_rho_capped(self):
        assert response_time(100.0, 100.0, 0.0, 250.0) == pytest.approx(25000.0)

    def test_zero_capacity_rejected(self):
        with pytest.raises(ConfigInvalid):
            response_time(1.0, 0.0, 0.0, 250.0)


class TestRunSimulation:
    def test_zero_workload_converges_to_floor(self):
        cfg = SimConfig(min_vms=1, max_vms=10, initial_vms=5, base_ms=100, slo_ms=1000)
        actions = [scale_down(10) for _ in range(3)]
        result = run_simulation(series([0.0] * 20), Scripted(actions), SPEC, cfg)
        assert result.running_vms[-1] == 1
        assert result.running_vms.min() >= 1
        # cost settles to one VM charged once per quantum
        tail_cost = result.cost_cumulative[-1] - result.cost_cumulative[-9]
        assert tail_cost == pytest.approx(2.0)  # 8 intervals / quantum 4

    def test_balance_point_no_backlog(self):
        cfg = SimConfig(min_vms=1, max_vms=10, initial_vms=1, base_ms=100, slo_ms=10_000)
        result = run_simulation(series([10.0] * 12), Scripted([]), SPEC, cfg)
        assert result.backlog.max() == 0.0
        assert np.array_equal(result.completed, np.full(12, 10.0))

    def test_step_demand_hand_oracle(self):
        # demand jumps 10x at t=2; the strategy orders 9 VMs the same
        # interval; startup delay 2 means relief lands at t=4.
        cfg = SimConfig(min_vms=1, max_vms=50, initial_vms=1, base_ms=100, slo_ms=10_000)
        demand = [10, 10, 100, 100, 100, 100, 100]
        actions = [NO_ACTION, NO_ACTION, scale_up(9)]
        result = run_simulation(series(demand), Scripted(actions), SPEC, cfg)
        # hand-simulated trace:
        # t=0: cap 10, served 10, backlog 0
        # t=1: cap 10, served 10, backlog 0
        # t=2: order 9; cap 10, served 10, backlog 90
        # t=3: cap 10, avail 190, served 10, backlog 180
        # t=4: boots join -> cap 100, avail 280, served 100, backlog 180
        # t=5: avail 280, served 100, backlog 180
        # t=6: avail 280, served 100, backlog 180
        assert list(result.running_vms) == [1, 1, 1, 1, 10, 10, 10]
        assert list(result.completed) == [10, 10, 10, 10, 100, 100, 100]
        assert list(result.backlog) == [0, 0, 90, 180, 180, 180, 180]

    def test_boot_delay_causality(self):
        cfg = SimConfig(min_vms=1, max_vms=50, initial_vms=1, base_ms=100, slo_ms=1000)
        actions = [NO_ACTION, scale_up(3), NO_ACTION, scale_up(2)]
        result = run_simulation(series([5.0] * 10), Scripted(actions), SPEC, cfg)
        orders = {t: n for kind, t, n in result.events if kind == "order"}
        boots = {t: n for kind, t, n in result.events if kind == "boot"}
        assert orders == {1: 3, 3: 2}
        assert boots == {1 + SPEC.startup_delay: 3, 3 + SPEC.startup_delay: 2}
        # capacity never rises earlier than the boot
        assert list(result.running_vms[:3]) == [1, 1, 1]
        assert result.running_vms[3] == 4

    def test_scale_down_effective_end_of_interval(self):
        cfg = SimConfig(min_vms=1, max_vms=10, initial_vms=4, base_ms=100, slo_ms=1000)
        actions = [scale_down(2)]
        result = run_simulation(series([40.0] * 3), Scripted(actions), SPEC, cfg)
        # the releasing interval still serves with 4 VMs
        assert result.running_vms[0] == 4
        assert result.completed[0] == 40.0
        assert result.running_vms[1] == 2

    def test_scale_down_cancels_booting_first(self):
        cfg = SimConfig(min_vms=1, max_vms=10, initial_vms=2, base_ms=100, slo_ms=1000)
        actions = [scale_up(3), scale_down(2)]
        result = run_simulation(series([5.0] * 6), Scripted(actions), SPEC, cfg)
        # 3 ordered at t=0; 2 cancelled at t=1 -> only 1 boots at t=2
        assert result.running_vms[2] == 3
        removed = [n for kind, t, n in result.events if kind == "remove"]
        assert removed == [2]

    def test_min_vms_floor_respected_under_hostile_downs(self):
        cfg = SimConfig(min_vms=2, max_vms=10, initial_vms=5, base_ms=100, slo_ms=1000)
        actions = [scale_down(50) for _ in range(6)]
        result = run_simulation(series([1.0] * 8), Scripted(actions), SPEC, cfg)
        assert result.running_vms.min() == 2

    def test_max_vms_cap_respected_under_hostile_ups(self):
        cfg = SimConfig(min_vms=1, max_vms=6, initial_vms=1, base_ms=100, slo_ms=1000)
        actions = [scale_up(50) for _ in range(6)]
        result = run_simulation(series([1.0] * 10), Scripted(actions), SPEC, cfg)
        assert (result.running_vms + result.booting_vms).max() <= 6
        assert result.running_vms.max() <= 6

    def test_billing_three_quanta(self):
        spec = VmSpec(capacity=10.0, startup_delay=1, billing_quantum=4, cost_per_quantum=2.5)
        cfg = SimConfig(min_vms=1, max_vms=5, initial_vms=1, base_ms=100, slo_ms=1000)
        result = run_simulation(series([1.0] * 12), Scripted([]), spec, cfg)
        # one VM alive 12 intervals = 3 started quanta of 4
        assert result.total_cost == pytest.approx(7.5)

    def test_booting_vms_billed(self):
        spec = VmSpec(capacity=10.0, startup_delay=3, billing_quantum=100, cost_per_quantum=1.0)
        cfg = SimConfig(min_vms=1, max_vms=5, initial_vms=1, base_ms=100, slo_ms=1000)
        with_boot = run_simulation(series([1.0] * 6), Scripted([scale_up(2)]), spec, cfg)
        assert with_boot.total_cost == pytest.approx(3.0)  # 1 running + 2 ordered

    @given(
        st.lists(st.integers(min_value=0, max_value=300), min_size=3, max_size=60),
        st.integers(min_value=0, max_value=2**31),
    )
    @settings(max_examples=120, deadline=None)
    def test_mass_conservation_exact(self, demand, seed):
        rng = np.random.default_rng(seed)
        actions = []
        for _ in range(len(demand)):
            roll = rng.integers(0, 3)
            if roll == 0:
                actions.append(scale_up(int(rng.integers(1, 5))))
            elif roll == 1:
                actions.append(scale_down(int(rng.integers(1, 5))))
            else:
                actions.append(NO_ACTION)
        cfg = SimConfig(min_vms=1, max_vms=30, initial_vms=2, base_ms=100, slo_ms=1000)
        result = run_simulation(series([float(d) for d in demand]), Scripted(actions), SPEC, cfg)
        assert result.completed.sum() + result.final_backlog == result.demand.sum()
        assert result.running_vms.min() >= 1
        assert result.running_vms.max() <= 30

    def test_deterministic_csv(self):
        demand = [5.0, 50.0, 5.0, 80.0] * 5
        actions = [scale_up(2), NO_ACTION, scale_down(1)] * 6
        cfg = SimConfig(min_vms=1, max_vms=20, initial_vms=2, base_ms=100, slo_ms=1000)
        a = run_simulation(series(demand), Scripted(actions), SPEC, cfg)
        b = run_simulation(series(demand), Scripted(actions), SPEC, cfg)
        assert a.to_csv() == b.to_csv()

    def test_csv_header(self):
        cfg = SimConfig(min_vms=1, max_vms=5, initial_vms=1, base_ms=100, slo_ms=1000)
        result = run_simulation(series([1.0]), Scripted([]), SPEC, cfg)
        assert result.to_csv().splitlines()[0] == (
            "t,running_vms,booting_vms,avg_response_ms,completed,backlog,sla_violated,cost_cumulative"
        )


class TestConfigValidation:
    def test_vm_spec(self):
        with pytest.raises(ConfigInvalid):
            VmSpec(capacity=0.0)
        with pytest.raises(ConfigInvalid):
            VmSpec(capacity=1.0, startup_delay=0)

    def test_sim_config(self):
        with pytest.raises(ConfigInvalid):
            SimConfig(min_vms=0)
        with pytest.raises(ConfigInvalid):
            SimConfig(min_vms=5, max_vms=3)
        with pytest.raises(ConfigInvalid):
            SimConfig(initial_vms=0, min_vms=1, max_vms=10)
