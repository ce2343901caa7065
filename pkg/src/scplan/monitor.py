"""Capacity conformance monitoring: required bandwidth, busy hour, trigger.

Each cell's required bandwidth is the SLA-capped demand divided by its
average spectral efficiency (Mbps per b/s/Hz gives MHz).  A cell violates
when its busy-hour requirement exceeds ``alpha`` times its allocated
bandwidth; the planner is triggered only after ``consecutive_steps``
violating steps in a row.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping

from .scenario import NetworkState

__all__ = [
    "MonitorParams",
    "DemandHistory",
    "CellCheck",
    "TriggerDecision",
    "SlaExceedNotice",
    "required_bandwidth",
    "busy_hour",
    "check_trigger",
    "sla_exceed_check",
]


@dataclass(frozen=True)
class MonitorParams:
    alpha: float = 0.9              # utilization threshold on allocated bandwidth
    window_steps: int = 24          # sliding window for busy-hour detection
    consecutive_steps: int = 3      # violating steps required to fire

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must be in [0, 1]")
        if self.window_steps < 1:
            raise ValueError("window_steps must be >= 1")
        if self.consecutive_steps < 1:
            raise ValueError("consecutive_steps must be >= 1")


class DemandHistory:
    """Ring of per-cell required-bandwidth samples over the sliding window.

    Also owns the per-cell consecutive-violation counters; counters reset on
    any non-violating step and after a fired trigger.
    """

    def __init__(self, window_steps: int):
        if window_steps < 1:
            raise ValueError("window_steps must be >= 1")
        self.window_steps = window_steps
        self._ring: dict[int, deque] = {}
        self.counters: dict[int, int] = {}

    def record(self, t: int, required_mhz: Mapping[int, float]):
        for cell_id, value in required_mhz.items():
            ring = self._ring.setdefault(cell_id, deque(maxlen=self.window_steps))
            ring.append((t, float(value)))
            self.counters.setdefault(cell_id, 0)

    def has(self, cell_id: int) -> bool:
        return bool(self._ring.get(cell_id))

    def window(self, cell_id: int) -> list[tuple[int, float]]:
        if not self.has(cell_id):
            raise ValueError(f"no history for cell {cell_id}")
        return list(self._ring[cell_id])

    def forget(self, cell_id: int):
        self._ring.pop(cell_id, None)
        self.counters.pop(cell_id, None)


def required_bandwidth(tenant_demands: Mapping[str, float],
                       specs: Mapping[str, float],
                       avg_se: float) -> float:
    """Spectrum (MHz) a cell needs for its SLA-capped demand.

    Sums min(demand, planning spec) over tenants and divides by the cell's
    average spectral efficiency.  A cell with zero SE but positive capped
    demand is un-servable: the requirement is infinite, so every expansion
    threshold reads as exceeded.
    """
    capped = sum(min(tenant_demands[m], specs[m]) for m in tenant_demands)
    if capped < 0:
        raise ValueError("demands and specs must be >= 0")
    if capped == 0:
        return 0.0
    if avg_se <= 0:
        return math.inf
    return capped / avg_se


def busy_hour(history: DemandHistory, cell_id: int) -> int:
    """Time index in the window with the highest requirement; ties go to the
    most recent step."""
    best_t, best_v = None, -math.inf
    for t, v in history.window(cell_id):
        if v >= best_v:
            best_t, best_v = t, v
    return best_t


def _busy_value(history: DemandHistory, cell_id: int) -> tuple[int, float]:
    t_b = busy_hour(history, cell_id)
    return t_b, dict(history.window(cell_id))[t_b]


@dataclass(frozen=True)
class CellCheck:
    t: int
    cell_id: int
    busy_step: int
    required_mhz: float
    threshold_mhz: float
    violation: bool
    counter: int


@dataclass(frozen=True)
class TriggerDecision:
    fire: bool
    violating_cells: tuple[int, ...]
    checks: tuple[CellCheck, ...] = ()


def check_trigger(history: DemandHistory, state: NetworkState,
                  params: MonitorParams, channel_bandwidth_mhz: float,
                  t: int) -> TriggerDecision:
    """Update violation counters and decide whether to launch planning.

    A cell violates when its busy-hour requirement strictly exceeds
    ``alpha * allocated_bandwidth``; the trigger fires when any counter
    reaches ``consecutive_steps``, after which all counters restart.
    """
    checks = []
    fired_cells = []
    for cell in state.cells:
        if not history.has(cell.cell_id):
            continue        # just deployed: first sample arrives next step
        t_b, value = _busy_value(history, cell.cell_id)
        threshold = params.alpha * len(cell.channels) * channel_bandwidth_mhz
        violation = value > threshold
        counter = history.counters.get(cell.cell_id, 0)
        counter = counter + 1 if violation else 0
        history.counters[cell.cell_id] = counter
        if counter >= params.consecutive_steps:
            fired_cells.append(cell.cell_id)
        checks.append(CellCheck(t, cell.cell_id, t_b, value, threshold,
                                violation, counter))
    fire = bool(fired_cells)
    if fire:
        for cell_id in history.counters:
            history.counters[cell_id] = 0
    return TriggerDecision(fire, tuple(fired_cells), tuple(checks))


@dataclass(frozen=True)
class SlaExceedNotice:
    """Informational record that a tenant's demand outgrew its contract."""

    tenant_id: str
    total_demand_mbps: float
    contracted_mbps: float


def sla_exceed_check(total_tenant_demand: float, contracted: float,
                     tenant_id: str = "") -> SlaExceedNotice | None:
    """Return a notice when demand strictly exceeds the contracted capacity."""
    if total_tenant_demand > contracted:
        return SlaExceedNotice(tenant_id, float(total_tenant_demand), float(contracted))
    return None
