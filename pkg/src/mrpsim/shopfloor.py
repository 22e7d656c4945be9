"""Event-driven job shop processing released production orders.

Machines serve one lot at a time from a FIFO queue.  Each operation takes a
lognormally distributed setup (coefficient of variation 0.2 around the
machine's mean) plus deterministic per-piece processing time, and lots move
to the next routing stage only as a whole.  Time is continuous in minutes;
the driver advances the floor period by period.

The floor also keeps the bookkeeping the KPIs need: setup+processing busy
minutes per machine clipped to the measurement window, and the time integral
of pieces on the floor (for Little's-law style checks).
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque

_ARRIVE = 0
_DONE = 1


class ProductionOrder:
    """One released or material-blocked lot on its way through the plant."""

    __slots__ = ("uid", "item", "qty", "due", "covered_end", "created_period",
                 "planned_start", "planned_completion", "status",
                 "release_time", "completion_time", "stage", "routing",
                 "proc_min", "component", "component_need")

    def __init__(self, uid: int, item_cfg, qty: int, due: int,
                 covered_end: int, created_period: int, planned_start: int,
                 planned_completion: int):
        self.uid = uid
        self.item = item_cfg.id
        self.qty = qty
        self.due = due
        self.covered_end = covered_end
        self.created_period = created_period
        self.planned_start = planned_start
        self.planned_completion = planned_completion
        self.status = "planned"            # -> released -> in_process -> completed
        self.release_time = -1.0
        self.completion_time = -1.0
        self.stage = 0
        self.routing = item_cfg.routing
        self.proc_min = item_cfg.processing_min
        self.component = item_cfg.component
        self.component_need = qty * item_cfg.component_qty


def sample_setup(rng: random.Random, mean: float, cv: float) -> float:
    """Lognormal setup time with given mean and coefficient of variation."""
    if mean <= 0:
        return 0.0
    if cv <= 0:
        return mean
    sigma2 = math.log(1.0 + cv * cv)
    mu = math.log(mean) - sigma2 / 2.0
    return rng.lognormvariate(mu, math.sqrt(sigma2))


class _MachineState:
    __slots__ = ("id", "setup_mean", "setup_cv", "queue", "busy",
                 "busy_window_min")

    def __init__(self, machine_cfg):
        self.id = machine_cfg.id
        self.setup_mean = machine_cfg.setup_mean_min
        self.setup_cv = machine_cfg.setup_cv
        self.queue: deque = deque()
        self.busy = False
        self.busy_window_min = 0.0


class ShopFloor:
    """All machines plus the shared future-event heap."""

    def __init__(self, system, rng: random.Random,
                 window_start_min: float = 0.0,
                 window_end_min: float = float("inf"),
                 event_log: list | None = None):
        self.system = system
        self.rng = rng
        self.machines = {mid: _MachineState(m) for mid, m in system.machines.items()}
        self.events: list = []
        self._seq = 0
        self.window = (window_start_min, window_end_min)
        self.event_log = event_log
        # time integral of pieces on the floor, for Little's-law checks
        self.pieces_on_floor = 0
        self.piece_minutes = 0.0
        self._cursor = 0.0

    def _push(self, time: float, kind: int, order: ProductionOrder) -> None:
        self._seq += 1
        heapq.heappush(self.events, (time, self._seq, kind, order))

    def dispatch(self, order: ProductionOrder, time: float) -> None:
        """Send a released order to the first machine of its routing."""
        order.stage = 0
        self.pieces_on_floor_changed(time, order.qty)
        self._push(time, _ARRIVE, order)
        if self.event_log is not None:
            self.event_log.append((time, "release", order.uid, order.item,
                                   "", order.qty))

    def pieces_on_floor_changed(self, time: float, delta: int) -> None:
        self._integrate(time)
        self.pieces_on_floor += delta

    def _integrate(self, time: float) -> None:
        if time > self._cursor:
            self.piece_minutes += self.pieces_on_floor * (time - self._cursor)
            self._cursor = time

    def _record_busy(self, start: float, end: float, machine: _MachineState) -> None:
        lo, hi = self.window
        overlap = min(end, hi) - max(start, lo)
        if overlap > 0:
            machine.busy_window_min += overlap

    def _try_start(self, machine: _MachineState, time: float) -> None:
        if machine.busy or not machine.queue:
            return
        order = machine.queue.popleft()
        if order.status == "released":
            order.status = "in_process"
        setup = sample_setup(self.rng, machine.setup_mean, machine.setup_cv)
        duration = setup + order.qty * order.proc_min
        machine.busy = True
        self._record_busy(time, time + duration, machine)
        self._push(time + duration, _DONE, order)
        if self.event_log is not None:
            self.event_log.append((time, "start", order.uid, order.item,
                                   f"M{machine.id}", order.qty))

    def advance(self, until: float, on_completion=None) -> None:
        """Process all floor events up to and including `until` minutes."""
        events = self.events
        while events and events[0][0] <= until:
            time, _, kind, order = heapq.heappop(events)
            if kind == _ARRIVE:
                machine = self.machines[order.routing[order.stage]]
                machine.queue.append(order)
                self._try_start(machine, time)
            else:
                machine = self.machines[order.routing[order.stage]]
                machine.busy = False
                if self.event_log is not None:
                    self.event_log.append((time, "finish_op", order.uid,
                                           order.item, f"M{machine.id}",
                                           order.qty))
                order.stage += 1
                if order.stage < len(order.routing):
                    self._push(time, _ARRIVE, order)
                else:
                    order.status = "completed"
                    order.completion_time = time
                    self.pieces_on_floor_changed(time, -order.qty)
                    if on_completion is not None:
                        on_completion(order, time)
                self._try_start(machine, time)
        self._integrate(until)

    def utilization(self, window_minutes: float) -> dict[int, float]:
        return {mid: m.busy_window_min / window_minutes
                for mid, m in self.machines.items()}
