"""Turns completed-request ledgers into measured quantities: latency
summaries (mean / nearest-rank percentiles / stdev / histogram), per-stage
breakdowns, CDFs, and bandwidth utilization.

Only read requests enter latency statistics (latency is measured from the
miss's injection to its data return); reads and writes both count toward
utilization.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .engine import MemoryRequest, TICKS_PER_NS


@dataclass(frozen=True)
class StatsSummary:
    count: int
    mean: float = 0.0
    p50: float = 0.0
    p90: float = 0.0
    p99: float = 0.0
    stdev: float = 0.0
    max: float = 0.0
    histogram: tuple = ()
    histogram_bin_ns: float = 1.0
    overflow: int = 0

    def to_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "p50": self.p50,
                "p90": self.p90, "p99": self.p99, "stdev": self.stdev,
                "max": self.max}


EMPTY_SUMMARY = StatsSummary(count=0)


def nearest_rank(sorted_samples, pct: float) -> float:
    """Nearest-rank percentile over an ascending-sorted sample."""
    n = len(sorted_samples)
    idx = max(0, math.ceil(pct / 100.0 * n) - 1)
    return float(sorted_samples[idx])


def summarize(samples_ns, histogram_cap_ns: float = 2000.0) -> StatsSummary:
    """Mean, nearest-rank percentiles, population stdev, and a fixed-1ns-bin
    histogram.  An empty sample yields the explicit empty summary."""
    arr = np.asarray(samples_ns, dtype=np.float64)
    if arr.size == 0:
        return EMPTY_SUMMARY
    arr = np.sort(arr)
    counts, _ = np.histogram(arr, bins=int(histogram_cap_ns),
                             range=(0.0, histogram_cap_ns))
    overflow = int((arr >= histogram_cap_ns).sum())
    return StatsSummary(
        count=int(arr.size),
        mean=float(arr.mean()),
        p50=nearest_rank(arr, 50),
        p90=nearest_rank(arr, 90),
        p99=nearest_rank(arr, 99),
        stdev=float(arr.std()),
        max=float(arr[-1]),
        histogram=tuple(int(c) for c in counts),
        overflow=overflow,
    )


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-stage means in ns; components sum to total exactly per request."""

    mc_queue: float
    dram_service: float
    link_port: float
    link_wire_queue: float
    total: float

    def shares(self) -> dict:
        t = self.total or 1.0
        return {"mc_queue": self.mc_queue / t,
                "dram_service": self.dram_service / t,
                "link_port": self.link_port / t,
                "link_wire_queue": self.link_wire_queue / t}

    def to_dict(self) -> dict:
        return {"mc_queue_ns": self.mc_queue, "dram_service_ns": self.dram_service,
                "link_port_ns": self.link_port,
                "link_wire_queue_ns": self.link_wire_queue, "total_ns": self.total}


def request_components_ticks(req: MemoryRequest) -> tuple[int, int, int, int]:
    """(mc_queue, dram_service, link_port, link_wire_queue) for one request;
    integer ticks that sum exactly to the request's total latency."""
    service = req.t_dram_done - req.t_dispatch
    if req.t_tx_depart or req.port_tx:
        ports = req.port_tx + (req.port_rx if req.is_read else 0)
        queue = req.t_dispatch - req.t_mc_enqueue
        wire = (req.t_mc_enqueue - req.t_inject - req.port_tx)
        if req.is_read:
            wire += req.t_complete - req.t_dram_done - req.port_rx
        return queue, service, ports, wire
    # no link: park time at the source folds into controller queuing
    return req.t_dispatch - req.t_inject, service, 0, 0


def breakdown(requests) -> LatencyBreakdown:
    """Aggregate read-latency breakdown over completed requests."""
    reads = [r for r in requests if r.is_read]
    if not reads:
        return LatencyBreakdown(0.0, 0.0, 0.0, 0.0, 0.0)
    q = s = p = w = 0
    for r in reads:
        cq, cs, cp, cw = request_components_ticks(r)
        q += cq
        s += cs
        p += cp
        w += cw
    n = len(reads) * TICKS_PER_NS
    return LatencyBreakdown(q / n, s / n, p / n, w / n, (q + s + p + w) / n)


def export_cdf(samples_ns, path: str) -> None:
    """Two-column CSV (latency_ns, cumulative_fraction) with a strictly
    increasing latency column."""
    arr = np.sort(np.asarray(samples_ns, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("cannot export a CDF of an empty sample")
    values, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts) / arr.size
    try:
        with open(path, "w") as fh:
            fh.write("latency_ns,cum_fraction\n")
            for v, c in zip(values, cum):
                fh.write(f"{v:.6g},{c:.9f}\n")
    except OSError as exc:
        raise OSError(f"cannot write CDF to {path}: {exc}") from exc


def read_latencies_ns(requests) -> np.ndarray:
    return np.asarray([r.total_latency() for r in requests if r.is_read],
                      dtype=np.float64) / TICKS_PER_NS


def queue_delays_ns(requests) -> np.ndarray:
    return np.asarray([r.t_dispatch - r.t_mc_enqueue
                       for r in requests if r.is_read],
                      dtype=np.float64) / TICKS_PER_NS


@dataclass(frozen=True)
class UtilizationReport:
    """Delivered bytes over peak bytes for the measurement window."""

    aggregate: float
    per_channel: tuple
    link_rx: tuple = ()
    link_tx: tuple = ()

    def to_dict(self) -> dict:
        return {"aggregate": self.aggregate,
                "per_channel": list(self.per_channel),
                "link_rx": list(self.link_rx), "link_tx": list(self.link_tx)}


def utilization(requests, topology, window_start: int, window_end: int,
                links=None) -> UtilizationReport:
    """Bandwidth utilization from the ledger: bytes completed inside the
    window divided by peak capacity, per channel and aggregate."""
    window = max(1, window_end - window_start)
    n_ch = topology.n_channels
    per_ch_bytes = [0] * n_ch
    for r in requests:
        if window_start <= r.t_dram_done <= window_end:
            per_ch_bytes[r.channel] += MemoryRequest.SIZE_BYTES
    peaks = [ch.peak_bytes_per_s for p in topology.paths for ch in p.channels]
    per_ch = tuple(b / (peak * window * 1e-12)
                   for b, peak in zip(per_ch_bytes, peaks))
    aggregate = sum(per_ch_bytes) / (sum(peaks) * window * 1e-12)
    link_rx = ()
    link_tx = ()
    if links:
        rx, tx = [], []
        for link in links:
            if link is None:
                continue
            rx.append(min(1.0, link.rx_busy_ticks / window))
            tx.append(min(1.0, link.tx_busy_ticks / window))
        link_rx, link_tx = tuple(rx), tuple(tx)
    return UtilizationReport(aggregate, per_ch, link_rx, link_tx)
