"""LLC-miss traffic: open-loop request streams, trace replay, the synthetic
fixed/bimodal latency backends, and the closed-loop core model that turns
per-miss latency into IPC.

Real miss streams are not Poisson: out-of-order cores emit misses in groups
bounded by their MSHRs, and that burstiness is what loads controller queues.
The open-loop generator therefore supports exponential, fixed, batched
(exponential gaps between geometric-size groups) and on/off-modulated
arrivals, all rate-preserving.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np

from .engine import MemoryRequest, ceil_div, ns_to_ticks
from .errors import ConfigError
from .rng import (Rng, STREAM_ADDRESSES, STREAM_ARRIVALS, STREAM_CORE_DEPS,
                  STREAM_CORE_GAPS, STREAM_CORE_LATENCY, STREAM_CORE_WRITES,
                  STREAM_RW)

ARRIVALS = ("exponential", "fixed", "batched", "onoff")
PATTERNS = ("uniform", "stride")


@dataclass
class OpenLoopSpec:
    """Fixed-rate injection regardless of completions.

    ``rate_bytes_per_s`` is the long-run injected byte rate.  ``batched``
    arrivals model MLP groups: geometric group sizes (mean ``batch_mean``)
    separated by exponential gaps.  ``onoff`` alternates a hot phase at
    ``on_rate_factor`` times the mean rate with a quiet phase chosen to
    preserve the mean.
    """

    rate_bytes_per_s: float
    request_count: int = 200_000
    arrival: str = "exponential"
    batch_mean: float = 16.0
    on_ticks: int = 10_000_000
    off_ticks: int = 10_000_000
    on_rate_factor: float = 2.0
    address_pattern: str = "uniform"
    stride_bytes: int = 64
    read_fraction: float = 0.67
    address_space_bytes: int = 128 << 30

    def __post_init__(self):
        if not 0.0 <= self.read_fraction <= 1.0:
            raise ConfigError("read fraction must lie in [0, 1]")
        if self.rate_bytes_per_s <= 0:
            raise ConfigError("injection rate must be positive")
        if self.arrival not in ARRIVALS:
            raise ConfigError(f"unknown arrival kind {self.arrival!r}")
        if self.address_pattern not in PATTERNS:
            raise ConfigError(f"unknown address pattern {self.address_pattern!r}")
        if self.request_count < 1:
            raise ConfigError("request count must be positive")
        if self.arrival == "batched" and self.batch_mean < 1.0:
            raise ConfigError("batch mean must be at least 1")


def _arrival_ticks(spec: OpenLoopSpec, rng: Rng) -> np.ndarray:
    n = spec.request_count
    mean_gap = MemoryRequest.SIZE_BYTES / spec.rate_bytes_per_s * 1e12
    if spec.arrival == "fixed":
        gap = max(1, round(mean_gap))
        return np.arange(1, n + 1, dtype=np.int64) * gap
    if spec.arrival == "exponential":
        return np.cumsum(rng.exponential_ticks(mean_gap, n))
    if spec.arrival == "batched":
        sizes = rng.geometric(1.0 / spec.batch_mean, n)
        cum = np.cumsum(sizes)
        n_batches = int(np.searchsorted(cum, n)) + 1
        sizes = sizes[:n_batches]
        gaps = rng.exponential_ticks(mean_gap * spec.batch_mean, n_batches)
        batch_ticks = np.cumsum(gaps)
        ticks = np.repeat(batch_ticks, sizes)[:n]
        return ticks
    # onoff: map arrivals generated in on-phase time onto the wall clock,
    # where each on window of on_ticks is followed by off_ticks at off rate
    on_rate = spec.rate_bytes_per_s * spec.on_rate_factor
    phi = spec.on_ticks / (spec.on_ticks + spec.off_ticks)
    off_rate = (spec.rate_bytes_per_s - on_rate * phi) / (1 - phi)
    if off_rate < -1e-6 * spec.rate_bytes_per_s:
        raise ConfigError("on-rate factor too high for the on/off duty cycle")
    on_gap = MemoryRequest.SIZE_BYTES / on_rate * 1e12
    on_time = np.cumsum(rng.exponential_ticks(on_gap, n))
    windows = on_time // spec.on_ticks
    ticks = on_time + windows * spec.off_ticks
    if off_rate > 1e-6 * spec.rate_bytes_per_s:
        off_gap = MemoryRequest.SIZE_BYTES / off_rate * 1e12
        off_time = np.cumsum(rng.exponential_ticks(off_gap, n))
        owin = off_time // spec.off_ticks
        off_wall = off_time + (owin + 1) * spec.on_ticks
        ticks = np.sort(np.concatenate([ticks, off_wall]), kind="stable")[:n]
    return ticks.astype(np.int64)


@dataclass
class RequestStream:
    """Precomputed request stream: parallel arrays plus lazy materialization."""

    ticks: np.ndarray
    lines: np.ndarray
    is_read: np.ndarray
    source: np.ndarray

    def __len__(self) -> int:
        return len(self.ticks)

    def request(self, i: int) -> MemoryRequest:
        req = MemoryRequest(i, int(self.source[i]),
                            int(self.lines[i]) * MemoryRequest.SIZE_BYTES,
                            bool(self.is_read[i]))
        req.t_inject = int(self.ticks[i])
        return req

    def achieved_rate_bytes_per_s(self) -> float:
        span = int(self.ticks[-1]) - int(self.ticks[0])
        if span <= 0:
            return float("inf")
        return (len(self.ticks) - 1) * MemoryRequest.SIZE_BYTES / (span * 1e-12)


def gen_open_loop(spec: OpenLoopSpec, rng: Rng,
                  downstream_peak_bytes_per_s: float | None = None) -> RequestStream:
    """Materialize an open-loop stream; inter-arrivals and addresses follow
    the spec and the long-run byte rate converges to the spec rate."""
    if (downstream_peak_bytes_per_s is not None
            and spec.rate_bytes_per_s > 10 * downstream_peak_bytes_per_s):
        warnings.warn(
            f"injection rate {spec.rate_bytes_per_s / 1e9:.1f} GB/s exceeds 10x "
            f"the downstream peak {downstream_peak_bytes_per_s / 1e9:.1f} GB/s; "
            "queues will saturate", stacklevel=2)
    n = spec.request_count
    ticks = _arrival_ticks(spec, rng.spawn(STREAM_ARRIVALS))
    if spec.address_pattern == "uniform":
        n_lines = spec.address_space_bytes // MemoryRequest.SIZE_BYTES
        lines = rng.spawn(STREAM_ADDRESSES).uniform_lines(n_lines, n)
    else:
        step = spec.stride_bytes // MemoryRequest.SIZE_BYTES
        span = spec.address_space_bytes // MemoryRequest.SIZE_BYTES
        lines = (np.arange(n, dtype=np.int64) * max(1, step)) % span
    if spec.read_fraction >= 1.0:
        reads = np.ones(n, dtype=bool)
    elif spec.read_fraction <= 0.0:
        reads = np.zeros(n, dtype=bool)
    else:
        reads = rng.spawn(STREAM_RW).bernoulli(spec.read_fraction, n)
    source = np.zeros(n, dtype=np.int64)
    return RequestStream(ticks, lines, reads, source)


def load_trace(path: str) -> RequestStream:
    """Parse a replay trace: one request per line,
    ``<tick_ps> <core> <R|W> <hex-address>``."""
    ticks, sources, reads, lines = [], [], [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 4 or parts[2] not in ("R", "W"):
                raise ConfigError(
                    f"{path}:{lineno}: expected '<tick_ps> <core> <R|W> "
                    f"<hex-address>', got {text!r}")
            try:
                tick = int(parts[0])
                core = int(parts[1])
                addr = int(parts[3], 16)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
            if ticks and tick < ticks[-1]:
                raise ConfigError(f"{path}:{lineno}: ticks must be non-decreasing")
            ticks.append(tick)
            sources.append(core)
            reads.append(parts[2] == "R")
            lines.append(addr // MemoryRequest.SIZE_BYTES)
    if not ticks:
        raise ConfigError(f"{path}: empty trace")
    return RequestStream(np.asarray(ticks, dtype=np.int64),
                         np.asarray(lines, dtype=np.int64),
                         np.asarray(reads, dtype=bool),
                         np.asarray(sources, dtype=np.int64))


# -- synthetic latency backends ------------------------------------------------


@dataclass(frozen=True)
class SyntheticLatencySpec:
    """Fixed or two-point (bimodal) memory latency distribution."""

    kind: str
    latency_ns: float = 0.0
    low_ns: float = 0.0
    high_ns: float = 0.0
    p_low: float = 0.8

    def __post_init__(self):
        if self.kind not in ("fixed", "bimodal"):
            raise ConfigError(f"unknown synthetic latency kind {self.kind!r}")
        if self.kind == "bimodal" and not 0.0 <= self.p_low <= 1.0:
            raise ConfigError("p_low must lie in [0, 1]")

    @staticmethod
    def fixed(latency_ns: float) -> "SyntheticLatencySpec":
        return SyntheticLatencySpec("fixed", latency_ns=latency_ns)

    @staticmethod
    def bimodal(low_ns: float, high_ns: float, p_low: float = 0.8) -> "SyntheticLatencySpec":
        return SyntheticLatencySpec("bimodal", low_ns=low_ns, high_ns=high_ns,
                                    p_low=p_low)

    @property
    def mean_ns(self) -> float:
        if self.kind == "fixed":
            return self.latency_ns
        return self.p_low * self.low_ns + (1 - self.p_low) * self.high_ns

    @property
    def stdev_ns(self) -> float:
        if self.kind == "fixed":
            return 0.0
        m = self.mean_ns
        var = (self.p_low * (self.low_ns - m) ** 2
               + (1 - self.p_low) * (self.high_ns - m) ** 2)
        return var ** 0.5

    def label(self) -> str:
        if self.kind == "fixed":
            return f"fixed-{self.latency_ns:g}ns"
        return f"bimodal-{self.low_ns:g}/{self.high_ns:g}ns"

    def draw_ticks(self, n: int, rng: Rng) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(n, ns_to_ticks(self.latency_ns), dtype=np.int64)
        low = rng.bernoulli(self.p_low, n)
        return np.where(low, ns_to_ticks(self.low_ns),
                        ns_to_ticks(self.high_ns)).astype(np.int64)


def synthetic_latency(spec: SyntheticLatencySpec, rng: Rng) -> int:
    """Draw one latency in ticks from the spec's distribution."""
    return int(spec.draw_ticks(1, rng)[0])


def standard_variance_distributions() -> list[SyntheticLatencySpec]:
    """The fixed-150ns baseline plus the three equal-mean bimodal spreads
    (stdev 100/150/200 ns)."""
    return [
        SyntheticLatencySpec.fixed(150.0),
        SyntheticLatencySpec.bimodal(100.0, 350.0, 0.8),
        SyntheticLatencySpec.bimodal(75.0, 450.0, 0.8),
        SyntheticLatencySpec.bimodal(50.0, 550.0, 0.8),
    ]


# -- closed-loop core model ----------------------------------------------------


@dataclass
class ClosedLoopCoreSpec:
    """In-order-retire window model of an out-of-order core.

    Up to ``issue_width`` instructions enter the ROB per cycle; non-miss
    instructions retire a cycle after reaching the head; an LLC-miss read
    occupies an MSHR and blocks retire at the head until its data returns.
    """

    cores: int = 12
    issue_width: int = 4
    rob_entries: int = 256
    mshrs: int = 16
    clock_hz: float = 2e9
    miss_prob: float = 0.04
    write_prob: float = 0.0
    dependency_prob: float = 0.0

    def __post_init__(self):
        if self.mshrs <= 0:
            raise ConfigError("core model needs at least one MSHR")
        if self.mshrs > self.rob_entries:
            raise ConfigError("more MSHRs than ROB entries")
        if not 0.0 <= self.miss_prob <= 1.0:
            raise ConfigError("miss probability must lie in [0, 1]")

    @property
    def cycle_ticks(self) -> int:
        return round(1e12 / self.clock_hz)


@dataclass
class CoreModelResult:
    ipc: float
    cycles: float
    instructions: int
    misses: int
    latency_ticks: np.ndarray


def _run_one_core(spec: ClosedLoopCoreSpec, backend: SyntheticLatencySpec,
                  instructions: int, rng: Rng) -> CoreModelResult:
    cycle = spec.cycle_ticks
    width = spec.issue_width
    rob = spec.rob_entries
    mshrs = spec.mshrs
    p = spec.miss_prob

    if p <= 0.0:
        head_time = ceil_div(instructions * cycle, width)
        cycles = head_time / cycle
        return CoreModelResult(instructions / cycles, cycles, instructions, 0,
                               np.empty(0, dtype=np.int64))

    n_miss_budget = int(instructions * p * 1.2) + 256
    gaps = rng.spawn(STREAM_CORE_GAPS).geometric(p, n_miss_budget) - 1
    lats = backend.draw_ticks(n_miss_budget, rng.spawn(STREAM_CORE_LATENCY))
    if spec.dependency_prob > 0:
        deps = rng.spawn(STREAM_CORE_DEPS).bernoulli(spec.dependency_prob,
                                                     n_miss_budget)
    else:
        deps = None
    if spec.write_prob > 0:
        writes = rng.spawn(STREAM_CORE_WRITES).bernoulli(spec.write_prob,
                                                         n_miss_budget)
    else:
        writes = None

    # retire timeline checkpoints: (instr_index_retired, tick); gaps retire
    # linearly at width/cycle between checkpoints
    checkpoints: list[tuple[int, int]] = [(0, 0)]
    ck_lo = 0
    outstanding: list[int] = []  # completion ticks of in-flight misses
    head_time = 0        # tick when the retire head finished the last item
    position = 0         # instruction index (1-based cumulative)
    prev_comp = 0
    misses = 0
    latencies = []
    i = 0
    while position < instructions and i < len(gaps):
        gap = int(gaps[i])
        position += gap + 1
        # ROB admission: the miss enters once instruction (position - rob)
        # has retired
        need = position - rob
        if need <= 0:
            t_enter = 0
        else:
            while ck_lo + 1 < len(checkpoints) and checkpoints[ck_lo + 1][0] < need:
                ck_lo += 1
            n0, t0 = checkpoints[ck_lo]
            if ck_lo + 1 < len(checkpoints) and checkpoints[ck_lo + 1][0] == need:
                t_enter = checkpoints[ck_lo + 1][1]
            else:
                t_enter = t0 + ceil_div((need - n0) * cycle, width)
        while outstanding and outstanding[0] <= t_enter:
            heapq.heappop(outstanding)
        t_issue = t_enter
        if len(outstanding) >= mshrs:
            slot_free = heapq.heappop(outstanding)
            if slot_free > t_issue:
                t_issue = slot_free
        if deps is not None and deps[i] and prev_comp > t_issue:
            t_issue = prev_comp
        comp = t_issue + int(lats[i])
        heapq.heappush(outstanding, comp)
        prev_comp = comp
        is_write = writes is not None and bool(writes[i])
        # head retires the gap, then (for reads) waits on the miss data
        head_time += ceil_div(gap * cycle, width)
        if not is_write and comp > head_time:
            head_time = comp
        head_time += ceil_div(cycle, width)
        checkpoints.append((position, head_time))
        if ck_lo > 65536:
            del checkpoints[:ck_lo]
            ck_lo = 0
        if not is_write:
            misses += 1
            latencies.append(int(lats[i]))
        i += 1
    # trailing non-miss instructions
    if position < instructions:
        head_time += ceil_div((instructions - position) * cycle, width)
        position = instructions
    cycles = head_time / cycle
    ipc = position / cycles if cycles > 0 else float(spec.issue_width)
    return CoreModelResult(ipc, cycles, position, misses,
                           np.asarray(latencies, dtype=np.int64))


def run_core_model(spec: ClosedLoopCoreSpec, backend: SyntheticLatencySpec,
                   instructions: int, rng: Rng) -> CoreModelResult:
    """Simulate the closed-loop core against a latency-serving backend.

    Runs each core as an independent stream and reports the mean per-core
    IPC with the pooled per-miss latency samples.
    """
    results = []
    for core in range(max(1, spec.cores)):
        results.append(_run_one_core(spec, backend, instructions,
                                     rng.spawn(core + 1)))
    ipc = sum(r.ipc for r in results) / len(results)
    cycles = sum(r.cycles for r in results) / len(results)
    instrs = sum(r.instructions for r in results)
    misses = sum(r.misses for r in results)
    lats = (np.concatenate([r.latency_ticks for r in results])
            if misses else np.empty(0, dtype=np.int64))
    return CoreModelResult(ipc, cycles, instrs, misses, lats)


@dataclass
class VarianceRow:
    label: str
    stdev_ns: float
    mean_ns: float
    ipc: float
    relative_ipc: float


def run_variance_experiment(core: ClosedLoopCoreSpec,
                            distributions: list[SyntheticLatencySpec],
                            instructions: int, rng: Rng) -> list[VarianceRow]:
    """IPC of each equal-mean latency distribution, normalized to the first
    (fixed-latency) entry.  Unequal means are a config error: the mean is the
    experiment's control variable."""
    if not distributions:
        raise ConfigError("need at least one latency distribution")
    mean0 = distributions[0].mean_ns
    for d in distributions:
        if abs(d.mean_ns - mean0) > 1e-9:
            raise ConfigError(
                f"distribution {d.label()} mean {d.mean_ns:g} ns differs from "
                f"{mean0:g} ns; the experiment holds the mean constant")
    rows = []
    base_ipc = None
    for d in distributions:
        res = run_core_model(core, d, instructions, rng)
        if base_ipc is None:
            base_ipc = res.ipc
        rows.append(VarianceRow(d.label(), d.stdev_ns, d.mean_ns, res.ipc,
                                res.ipc / base_ipc))
    return rows
