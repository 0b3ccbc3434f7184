"""Deterministic fluid-flow simulation of a VM fleet under a scaler.

Each interval the fleet serves ``min(backlog + demand, capacity)``
demand units, so demand mass is conserved exactly: what is not served
carries over as backlog. VMs ordered by a scale-up action become
capacity only after the startup delay, scale-downs remove the newest
VMs at the end of the interval, and billing accrues per started
quantum for running and booting VMs alike. The event loop is identical
for every strategy; a strategy only sees the observed demand and a
fleet snapshot and returns a ScalingAction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from flashscale.scaling import FleetInfo, ScalingAction
from flashscale.traces import WorkloadSeries


class ConfigInvalid(ValueError):
    """Simulation or VM configuration violates a precondition."""


@dataclass(frozen=True)
class VmSpec:
    """One VM flavor: capacity per interval, boot delay, and billing."""

    capacity: float
    startup_delay: int = 2
    billing_quantum: int = 12
    cost_per_quantum: float = 1.0

    def __post_init__(self):
        if self.capacity <= 0:
            raise ConfigInvalid("vm capacity must be positive")
        if self.startup_delay < 1:
            raise ConfigInvalid("startup_delay must be >= 1 interval")
        if self.billing_quantum < 1 or self.cost_per_quantum < 0:
            raise ConfigInvalid("billing quantum must be >= 1, cost >= 0")


@dataclass(frozen=True)
class SimConfig:
    min_vms: int = 1
    max_vms: int = 1000
    initial_vms: int = 1
    base_ms: float = 300.0
    slo_ms: float = 1200.0
    target_util: float = 0.7

    def __post_init__(self):
        if not 1 <= self.min_vms <= self.max_vms:
            raise ConfigInvalid("need 1 <= min_vms <= max_vms")
        if not self.min_vms <= self.initial_vms <= self.max_vms:
            raise ConfigInvalid("initial_vms must lie in [min_vms, max_vms]")
        if self.base_ms <= 0 or self.slo_ms <= 0:
            raise ConfigInvalid("base_ms and slo_ms must be positive")
        if not 0 < self.target_util <= 1:
            raise ConfigInvalid("target_util must be in (0, 1]")


class Scaler(Protocol):
    """What the event loop requires of a scaling strategy."""

    name: str

    def observe(self, t: int, demand: float, fleet: FleetInfo) -> ScalingAction: ...


def response_time(served: float, capacity: float, backlog: float, base_ms: float) -> float:
    """Interval response-time model: congestion times backlog inflation.

    rho is the served fraction of capacity, capped at 0.99 so the
    congestion factor 1/(1 - rho) stays finite; queued backlog inflates
    the result linearly. Monotone in both rho and backlog.
    """
    if capacity <= 0:
        raise ConfigInvalid("capacity must be positive")
    rho = min(served / capacity, 0.99)
    return base_ms * (1.0 + backlog / capacity) / (1.0 - rho)


@dataclass
class SimResult:
    """Per-interval fleet telemetry plus the run's event trail."""

    start_time: float
    interval: float
    demand: np.ndarray
    running_vms: np.ndarray
    booting_vms: np.ndarray
    avg_response_ms: np.ndarray
    completed: np.ndarray
    backlog: np.ndarray
    sla_violated: np.ndarray
    cost_cumulative: np.ndarray
    # (kind, t, count) with kind in {"order", "boot", "remove"}
    events: list[tuple[str, int, int]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.demand)

    @property
    def final_backlog(self) -> float:
        return float(self.backlog[-1])

    @property
    def total_cost(self) -> float:
        return float(self.cost_cumulative[-1])

    def to_csv(self) -> str:
        lines = ["t,running_vms,booting_vms,avg_response_ms,completed,backlog,sla_violated,cost_cumulative"]
        for t in range(len(self)):
            lines.append(
                f"{t},{int(self.running_vms[t])},{int(self.booting_vms[t])},"
                f"{float(self.avg_response_ms[t])!r},{float(self.completed[t])!r},"
                f"{float(self.backlog[t])!r},{int(self.sla_violated[t])},"
                f"{float(self.cost_cumulative[t])!r}"
            )
        return "\n".join(lines) + "\n"


@dataclass
class _Vm:
    vm_id: int
    start: int  # interval the VM was ordered (billing starts here)
    ready_at: int  # interval it joins the running fleet


def run_simulation(
    workload: WorkloadSeries,
    strategy: Scaler,
    spec: VmSpec,
    cfg: SimConfig,
) -> SimResult:
    """Replay a workload through the fleet under one scaling strategy.

    Interval ordering: finished boots join the fleet, the strategy
    observes the arriving demand and may order or release VMs, billing
    accrues for every alive VM whose quantum starts this interval, the
    fleet serves from backlog plus arrivals, and releases take effect
    at the end of the interval. Deterministic for identical inputs.
    """
    n = len(workload)
    demand = workload.demand
    running: list[_Vm] = [_Vm(vm_id=i, start=0, ready_at=0) for i in range(cfg.initial_vms)]
    booting: list[_Vm] = []
    next_id = cfg.initial_vms
    backlog = 0.0
    cost = 0.0

    out = {
        key: np.zeros(n)
        for key in (
            "running_vms", "booting_vms", "avg_response_ms",
            "completed", "backlog", "sla_violated", "cost_cumulative",
        )
    }
    events: list[tuple[str, int, int]] = []

    for t in range(n):
        ready = [vm for vm in booting if vm.ready_at <= t]
        if ready:
            booting = [vm for vm in booting if vm.ready_at > t]
            running.extend(ready)
            events.append(("boot", t, len(ready)))

        fleet = FleetInfo(
            running=len(running),
            booting=len(booting),
            vm_capacity=spec.capacity,
            min_vms=cfg.min_vms,
            max_vms=cfg.max_vms,
            target_util=cfg.target_util,
        )
        action = strategy.observe(t, float(demand[t]), fleet)

        if action.kind == "scale_up":
            room = cfg.max_vms - (len(running) + len(booting))
            count = min(action.count, room)
            if count > 0:
                for _ in range(count):
                    booting.append(_Vm(vm_id=next_id, start=t, ready_at=t + spec.startup_delay))
                    next_id += 1
                events.append(("order", t, count))

        for vm in running:
            if (t - vm.start) % spec.billing_quantum == 0:
                cost += spec.cost_per_quantum
        for vm in booting:
            if (t - vm.start) % spec.billing_quantum == 0:
                cost += spec.cost_per_quantum

        capacity = len(running) * spec.capacity
        available = backlog + float(demand[t])
        served = min(available, capacity)
        backlog = available - served
        rt = response_time(served, capacity, backlog, cfg.base_ms)

        out["running_vms"][t] = len(running)
        out["booting_vms"][t] = len(booting)
        out["avg_response_ms"][t] = rt
        out["completed"][t] = served
        out["backlog"][t] = backlog
        out["sla_violated"][t] = 1.0 if rt > cfg.slo_ms else 0.0
        out["cost_cumulative"][t] = cost

        if action.kind == "scale_down":
            removed = 0
            want = action.count
            # Cancel pending boots first (newest orders first), then
            # release the newest running VMs down to the floor.
            while want > 0 and booting:
                booting.pop()
                removed += 1
                want -= 1
            while want > 0 and len(running) > cfg.min_vms:
                running.pop()
                removed += 1
                want -= 1
            if removed:
                events.append(("remove", t, removed))

    return SimResult(
        start_time=workload.start_time,
        interval=workload.interval,
        demand=demand.copy(),
        events=events,
        metadata={
            "strategy": getattr(strategy, "name", strategy.__class__.__name__),
            "vm_capacity": spec.capacity,
            "startup_delay": spec.startup_delay,
            "billing_quantum": spec.billing_quantum,
            "cost_per_quantum": spec.cost_per_quantum,
            "min_vms": cfg.min_vms,
            "max_vms": cfg.max_vms,
            "initial_vms": cfg.initial_vms,
            "base_ms": cfg.base_ms,
            "slo_ms": cfg.slo_ms,
            "target_util": cfg.target_util,
        },
        **{k: v for k, v in out.items()},
    )
