"""Discrete-event kernel: integer-picosecond clock, deterministic event queue,
and the per-request timestamp ledger shared by every other module.

All simulated time is integer picoseconds.  Nanosecond-valued configuration
multiplies by 1000 exactly, so two runs of the same (config, seed) produce
bit-identical ledgers on any platform.
"""

from __future__ import annotations

import heapq
from enum import IntEnum

from .errors import SimulationError

TICKS_PER_NS = 1000


def ns_to_ticks(ns: float) -> int:
    """Exact ns -> integer ps conversion for configuration values."""
    return round(ns * TICKS_PER_NS)


def ticks_to_ns(ticks: int) -> float:
    return ticks / TICKS_PER_NS


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class EventKind(IntEnum):
    """Event kinds; enum order is the tie-break order at equal due times."""

    INJECT = 0
    MC_ENQUEUE = 1
    MC_DISPATCH = 2
    DRAM_COMPLETE = 3
    LINK_DEPART = 4
    LINK_ARRIVE = 5
    COMPLETE = 6


class MemoryRequest:
    """One 64-byte read or write, with its per-stage timestamp ledger.

    Ledger ticks are filled as the request moves through the pipeline and are
    non-decreasing in pipeline order.  Link-stage fields stay 0 on paths
    without a CXL link.
    """

    SIZE_BYTES = 64

    __slots__ = (
        "id", "source", "address", "is_read",
        "path", "channel", "subchannel", "bank", "row",
        "t_inject", "t_mc_enqueue", "t_dispatch", "t_dram_done", "t_complete",
        "t_tx_depart", "t_tx_arrive", "t_rx_ready", "t_rx_depart",
        "port_tx", "port_rx", "bypasses",
    )

    def __init__(self, rid: int, source: int, address: int, is_read: bool):
        self.id = rid
        self.source = source
        self.address = address
        self.is_read = is_read
        self.path = 0
        self.channel = 0
        self.subchannel = 0
        self.bank = 0
        self.row = 0
        self.t_inject = 0
        self.t_mc_enqueue = 0
        self.t_dispatch = 0
        self.t_dram_done = 0
        self.t_complete = 0
        self.t_tx_depart = 0
        self.t_tx_arrive = 0
        self.t_rx_ready = 0
        self.t_rx_depart = 0
        self.port_tx = 0
        self.port_rx = 0
        self.bypasses = 0

    def total_latency(self) -> int:
        return self.t_complete - self.t_inject

    def ledger_sequence(self) -> tuple:
        """Pipeline-ordered timestamps (for monotonicity checks)."""
        if self.t_tx_depart:
            seq = (self.t_inject, self.t_tx_depart, self.t_tx_arrive,
                   self.t_mc_enqueue, self.t_dispatch, self.t_dram_done)
        else:
            seq = (self.t_inject, self.t_mc_enqueue, self.t_dispatch,
                   self.t_dram_done)
        return seq + (self.t_complete,)


class SimulationTrace:
    """Completed-request ledger plus engine counters."""

    def __init__(self, completed, final_clock, events_dispatched, injected):
        self.completed = completed
        self.final_clock = final_clock
        self.events_dispatched = events_dispatched
        self.injected = injected

    @property
    def completed_count(self) -> int:
        return len(self.completed)


class Simulator:
    """Single-threaded event loop.

    Events at equal due ticks dispatch by (kind order, request id); a strictly
    increasing sequence number keeps heap comparisons total without ever
    overriding that tie-break.
    """

    def __init__(self):
        self.clock = 0
        self._heap = []
        self._seq = 0
        self.events_dispatched = 0
        self.injected = 0
        self.completed = []
        # handler table indexed by EventKind; set by the wiring layer
        self._handlers = [None] * len(EventKind)

    def set_handler(self, kind: EventKind, fn) -> None:
        self._handlers[kind] = fn

    def schedule(self, due: int, kind: EventKind, request_id: int, payload=None) -> None:
        if due < self.clock:
            raise SimulationError(
                f"event {kind.name} for request {request_id} scheduled at "
                f"{due} ps, before current clock {self.clock} ps"
            )
        self._seq += 1
        heapq.heappush(self._heap, (due, int(kind), request_id, self._seq, payload))

    @property
    def in_flight(self) -> int:
        return self.injected - len(self.completed)

    def pending_events(self) -> int:
        return len(self._heap)

    def run_until(self, max_tick: int | None = None,
                  max_completed: int | None = None,
                  expect_drained: bool = False) -> SimulationTrace:
        """Dispatch events until a tick or completed-request limit.

        With ``expect_drained`` the caller asserts the event queue may only
        empty once every injected request completed; anything else is an
        internal inconsistency.
        """
        heap = self._heap
        handlers = self._handlers
        pop = heapq.heappop
        completed = self.completed
        while heap:
            if max_completed is not None and len(completed) >= max_completed:
                break
            if max_tick is not None and heap[0][0] > max_tick:
                self.clock = max_tick
                break
            due, kind, rid, _, payload = pop(heap)
            self.clock = due
            self.events_dispatched += 1
            handlers[kind](rid, payload)
        else:
            if expect_drained and self.in_flight != 0:
                raise SimulationError(
                    f"event queue drained with {self.in_flight} requests in flight"
                )
            if max_tick is not None and self.clock < max_tick:
                self.clock = max_tick
        return SimulationTrace(completed, self.clock, self.events_dispatched,
                               self.injected)
