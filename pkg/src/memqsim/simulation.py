"""Wires traffic streams, CXL links, and DDR channels into one event-driven
simulation instance and produces the completed-request ledger.

Request lifecycle on a linked path:
inject -> link TX FIFO -> TX wire (+port) -> controller queue -> dispatch ->
DRAM service -> (reads) RX FIFO -> RX wire (+port) -> complete.
Baseline paths skip the link stages; writes complete at DRAM service end.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cxl import CxlLink
from .dram import DramChannel
from .engine import EventKind, MemoryRequest, Simulator, SimulationTrace
from .errors import SimulationError
from .topology import Topology
from .traffic import RequestStream


class MemorySystem:
    """One simulation instance: single-threaded, owned state only."""

    def __init__(self, topology: Topology, stream: RequestStream):
        self.topology = topology
        self.stream = stream
        self.sim = Simulator()

        self.channels: list[DramChannel] = []
        self.links: list[CxlLink | None] = []
        self.channel_link: list[CxlLink | None] = []
        self.link_channels: dict[int, list[DramChannel]] = {}
        gidx = 0
        for p, path in enumerate(topology.paths):
            link = CxlLink(path.link, p) if path.link is not None else None
            self.links.append(link)
            if link is not None:
                self.link_channels[p] = []
            for timing in path.channels:
                ch = DramChannel(timing, gidx)
                if link is not None:
                    ch.rx_gate = link.rx_has_room
                    self.link_channels[p].append(ch)
                self.channels.append(ch)
                self.channel_link.append(link)
                gidx += 1
        self._n_channels = gidx
        self._gran = topology.interleave_granularity
        self._owners = topology.channel_owners
        self._inject_idx = 0
        # native-int copies of the stream arrays keep the hot path free of
        # numpy scalar propagation
        self._ticks = stream.ticks.tolist()
        self._lines = stream.lines.tolist()
        self._reads = stream.is_read.tolist()
        self._sources = stream.source.tolist()

        sim = self.sim
        sim.set_handler(EventKind.INJECT, self._on_inject)
        sim.set_handler(EventKind.MC_ENQUEUE, self._on_mc_enqueue)
        sim.set_handler(EventKind.MC_DISPATCH, self._on_wakeup)
        sim.set_handler(EventKind.DRAM_COMPLETE, self._on_dram_complete)
        sim.set_handler(EventKind.LINK_DEPART, self._on_link_depart)
        sim.set_handler(EventKind.COMPLETE, self._on_complete)
        if len(stream):
            sim.schedule(int(stream.ticks[0]), EventKind.INJECT, 0)

    # -- event handlers ------------------------------------------------------

    def _on_inject(self, rid: int, _payload) -> None:
        req = MemoryRequest(rid, self._sources[rid],
                            self._lines[rid] * MemoryRequest.SIZE_BYTES,
                            self._reads[rid])
        req.t_inject = self._ticks[rid]
        now = self.sim.clock
        self.sim.injected += 1
        self._inject_idx = rid + 1
        if rid + 1 < len(self._ticks):
            self.sim.schedule(self._ticks[rid + 1], EventKind.INJECT, rid + 1)

        addr = req.address
        gchan = (addr // self._gran) % self._n_channels
        req.path, _ = self._owners[gchan]
        req.channel = gchan
        per_ch = self._gran // MemoryRequest.SIZE_BYTES
        local_line = ((addr // self._gran) // self._n_channels) * per_ch \
            + (addr % self._gran) // MemoryRequest.SIZE_BYTES
        channel = self.channels[gchan]
        channel.decode(req, local_line)

        link = self.channel_link[gchan]
        if link is None:
            if channel.offer(req, now):
                self._dispatch_loop(channel, now)
            else:
                channel.park(req)
        else:
            if not link.offer_tx(req):
                link.park(req)
            link.try_start_tx(now, self.sim, self.channels)

    def _on_mc_enqueue(self, rid: int, req: MemoryRequest) -> None:
        channel = self.channels[req.channel]
        channel.admit_reserved(req, self.sim.clock)
        self._dispatch_loop(channel, self.sim.clock)

    def _on_wakeup(self, gchan: int, _payload) -> None:
        channel = self.channels[gchan]
        if channel.wakeup_tick is not None and channel.wakeup_tick <= self.sim.clock:
            channel.wakeup_tick = None
        self._dispatch_loop(channel, self.sim.clock)

    def _on_dram_complete(self, rid: int, req: MemoryRequest) -> None:
        now = self.sim.clock
        channel = self.channels[req.channel]
        channel.record_delivery(req)
        link = self.channel_link[req.channel]
        if req.is_read and link is not None:
            link.queue_response(req, now, self.sim)
            self._kick_link_reads(link, now)
        else:
            self._finalize(req, now)
        self._dispatch_loop(channel, now)

    def _on_link_depart(self, rid: int, payload) -> None:
        link, direction = payload
        now = self.sim.clock
        if direction == "tx":
            link.tx_busy = False
            link.try_start_tx(now, self.sim, self.channels)
        else:
            link.rx_busy = False
            if link.try_start_rx(now, self.sim):
                self._kick_link_reads(link, now)

    def _on_complete(self, rid: int, req: MemoryRequest) -> None:
        self._finalize(req, self.sim.clock)

    # -- helpers ---------------------------------------------------------------

    def _finalize(self, req: MemoryRequest, now: int) -> None:
        req.t_complete = now
        self.sim.completed.append(req)

    def _kick_link_reads(self, link: CxlLink, now: int) -> None:
        for channel in self.link_channels[link.path_id]:
            self._dispatch_loop(channel, now)

    def _dispatch_loop(self, channel: DramChannel, now: int) -> None:
        sim = self.sim
        link = self.channel_link[channel.channel_id]
        dispatched = False
        while True:
            req, idx, queue, earliest = channel.pick(now)
            if req is None:
                break
            if req.is_read and link is not None:
                link.hold_rx_slot()
            done = channel.dispatch(req, idx, queue, now)
            sim.schedule(done, EventKind.DRAM_COMPLETE, req.id, req)
            dispatched = True
        if earliest < (1 << 62) and channel.queued():
            if channel.wakeup_tick is None or earliest < channel.wakeup_tick:
                channel.wakeup_tick = earliest
                sim.schedule(earliest, EventKind.MC_DISPATCH, channel.channel_id)
        if dispatched and link is not None:
            # queue slots freed; a waiting TX message may now reserve one
            link.try_start_tx(now, sim, self.channels)

    # -- run --------------------------------------------------------------------

    def run(self, max_tick: int | None = None,
            max_completed: int | None = None) -> SimulationTrace:
        """Dispatch events until the limit; with no limit, drain the stream."""
        expect_drained = max_tick is None and max_completed is None
        trace = self.sim.run_until(max_tick=max_tick, max_completed=max_completed,
                                   expect_drained=expect_drained)
        if expect_drained and trace.completed_count != len(self.stream):
            raise SimulationError(
                f"drained with {trace.completed_count} of {len(self.stream)} "
                "requests completed")
        return trace


class FixedLatencySystem:
    """Degenerate backend: every request completes a fixed delay after
    injection (no queuing, unbounded parallelism).  Exercises the engine
    contracts and models an idealized memory."""

    def __init__(self, stream: RequestStream, latency_ticks: int):
        self.stream = stream
        self.latency = latency_ticks
        self.sim = Simulator()
        self.sim.set_handler(EventKind.INJECT, self._on_inject)
        self.sim.set_handler(EventKind.COMPLETE, self._on_complete)
        if len(stream):
            self.sim.schedule(int(stream.ticks[0]), EventKind.INJECT, 0)

    def _on_inject(self, rid: int, _payload) -> None:
        req = self.stream.request(rid)
        self.sim.injected += 1
        if rid + 1 < len(self.stream):
            self.sim.schedule(int(self.stream.ticks[rid + 1]), EventKind.INJECT,
                              rid + 1)
        now = self.sim.clock
        req.t_mc_enqueue = req.t_dispatch = now
        req.t_dram_done = now + self.latency
        self.sim.schedule(now + self.latency, EventKind.COMPLETE, rid, req)

    def _on_complete(self, rid: int, req: MemoryRequest) -> None:
        req.t_complete = self.sim.clock
        self.sim.completed.append(req)

    def run(self, **kw) -> SimulationTrace:
        return self.sim.run_until(**kw)
