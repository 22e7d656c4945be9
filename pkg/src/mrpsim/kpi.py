"""Cost and service accounting over the measurement window.

Inventory is priced from end-of-period snapshots taken after fulfillment:
work in process (every released piece not yet in final-goods stock, plus
component stock) at 0.5 CU, final-goods stock at 1.0 CU, and open due demand
at 19.0 CU per piece and period.  Reported cost figures are per-period
averages over the measured periods (warmup excluded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PeriodSnapshot:
    period: int
    wip_pieces: int
    fgi_pieces: int
    backorder_pieces: int


def accrue(snapshot: PeriodSnapshot, rates) -> float:
    return (snapshot.wip_pieces * rates.wip
            + snapshot.fgi_pieces * rates.fgi
            + snapshot.backorder_pieces * rates.backorder)


@dataclass
class RunSummary:
    """KPI vector of one simulation run (costs are CU per period)."""

    overall_cost: float = 0.0
    wip_cost: float = 0.0
    fgi_cost: float = 0.0
    backorder_cost: float = 0.0
    service_level: float = 1.0
    n_final_orders: int = 0
    leadtime_mean: float = 0.0
    leadtime_sd: float = 0.0
    avg_wip_pieces: float = 0.0
    avg_fgi_pieces: float = 0.0
    avg_backorder_pieces: float = 0.0
    machine_utilization: dict[int, float] = field(default_factory=dict)
    demands_total: int = 0
    demands_on_time: int = 0
    floor_piece_minutes: float = 0.0


class KpiTracker:
    """Collects snapshots and order/demand outcomes during a run."""

    def __init__(self, run_length: int, warmup: int):
        if warmup >= run_length:
            raise ValueError("warmup must end before the run does")
        self.run_length = run_length
        self.warmup = warmup
        self.snapshots: list[PeriodSnapshot] = []
        self.leadtimes: list[float] = []
        self.n_final_orders = 0

    @property
    def measured_periods(self) -> int:
        return self.run_length - self.warmup

    def record_snapshot(self, snapshot: PeriodSnapshot) -> None:
        self.snapshots.append(snapshot)

    def record_release(self, period_minutes: float, release_time: float) -> None:
        if release_time >= self.warmup * period_minutes:
            self.n_final_orders += 1

    def record_completion(self, period_minutes: float, release_time: float,
                          completion_time: float) -> None:
        if completion_time >= self.warmup * period_minutes:
            self.leadtimes.append((completion_time - release_time) / period_minutes)

    def summarize(self, rates, demands, machine_utilization: dict[int, float],
                  floor_piece_minutes: float = 0.0) -> RunSummary:
        measured = [s for s in self.snapshots if s.period > self.warmup]
        if len(measured) != self.measured_periods:
            raise ValueError(f"expected {self.measured_periods} measured "
                             f"snapshots, got {len(measured)}")
        n = len(measured)
        wip = sum(s.wip_pieces for s in measured) / n
        fgi = sum(s.fgi_pieces for s in measured) / n
        backorder = sum(s.backorder_pieces for s in measured) / n

        in_window = [d for d in demands
                     if self.warmup < d.due <= self.run_length]
        on_time = sum(1 for d in in_window if d.fulfilled_period == d.due)
        service = on_time / len(in_window) if in_window else 1.0

        lead_mean = lead_sd = 0.0
        if self.leadtimes:
            lead_mean = sum(self.leadtimes) / len(self.leadtimes)
            if len(self.leadtimes) > 1:
                var = (sum((x - lead_mean) ** 2 for x in self.leadtimes)
                       / (len(self.leadtimes) - 1))
                lead_sd = math.sqrt(var)

        summary = RunSummary(
            wip_cost=wip * rates.wip,
            fgi_cost=fgi * rates.fgi,
            backorder_cost=backorder * rates.backorder,
            service_level=service,
            n_final_orders=self.n_final_orders,
            leadtime_mean=lead_mean,
            leadtime_sd=lead_sd,
            avg_wip_pieces=wip,
            avg_fgi_pieces=fgi,
            avg_backorder_pieces=backorder,
            machine_utilization=dict(machine_utilization),
            demands_total=len(in_window),
            demands_on_time=on_time,
            floor_piece_minutes=floor_piece_minutes,
        )
        summary.overall_cost = (summary.wip_cost + summary.fgi_cost
                                + summary.backorder_cost)
        return summary
