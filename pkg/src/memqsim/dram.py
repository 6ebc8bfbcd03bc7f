"""DDR5 channel model: controller queues, bank-state timing, FR-FCFS
scheduling, and read/write turnaround.

The controller queue is where loaded-system latency is made: a request's
queue delay is ``t_dispatch - t_mc_enqueue``, and its service time is the
row-state-dependent DRAM access proper.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import EventKind, MemoryRequest, ceil_div, ns_to_ticks
from .errors import ConfigError

# Row states at dispatch.
ROW_HIT = 0
ROW_CLOSED = 1
ROW_CONFLICT = 2

SCHED_FRFCFS = "frfcfs"
SCHED_FCFS = "fcfs"

_FUTURE = 1 << 62


@dataclass
class DramTiming:
    """DDR channel timing and controller configuration.

    Defaults model a DDR5-4800 channel: two independent 32-bit subchannels,
    one rank of 32 banks each, for a 38.4 GB/s combined peak.  Core timings
    (tRCD = tCL = tRP = 16 ns, tRAS = 32 ns, BL16) are representative
    JEDEC-class values; everything is overridable from the scenario file.

    ``idle_precharge_ns`` closes a row after the bank sits idle that long
    (open-page policy with a timeout), and ``write_recovery_ns`` keeps a bank
    busy after a write burst; both matter for loaded behavior.  Queue
    capacities are per channel and split evenly across subchannels.
    """

    data_rate_mts: int = 4800
    subchannels: int = 2
    ranks_per_subchannel: int = 1
    banks_per_rank: int = 32
    trcd_ns: float = 16.0
    tcl_ns: float = 16.0
    trp_ns: float = 16.0
    tras_ns: float = 32.0
    burst_length: int = 16
    bus_width_bits: int = 32
    read_write_turnaround_ns: float = 7.0
    write_read_turnaround_ns: float = 12.0
    controller_pipeline_ns: float = 8.0
    write_recovery_ns: float = 30.0
    idle_precharge_ns: float = 120.0
    row_bytes: int = 2048
    read_queue_capacity: int = 64
    write_queue_capacity: int = 64
    write_drain_high: int = 48
    write_drain_low: int = 16
    starvation_cap: int = 16
    scheduler: str = SCHED_FRFCFS

    def __post_init__(self):
        if self.scheduler not in (SCHED_FRFCFS, SCHED_FCFS):
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")
        if self.write_drain_low > self.write_drain_high:
            raise ConfigError("write drain low watermark above high watermark")
        if self.write_drain_high > self.write_queue_capacity:
            raise ConfigError("write drain high watermark above queue capacity")

    @property
    def banks_per_subchannel(self) -> int:
        return self.banks_per_rank * self.ranks_per_subchannel

    @property
    def total_banks(self) -> int:
        return self.banks_per_subchannel * self.subchannels

    @property
    def peak_bytes_per_s(self) -> float:
        """Peak channel bandwidth: data rate x total bus bytes."""
        return self.data_rate_mts * 1e6 * self.subchannels * self.bus_width_bits / 8

    @property
    def tburst_ticks(self) -> int:
        """Data-burst bus occupancy, rounded up to whole picoseconds."""
        return ceil_div(self.burst_length * 1_000_000, self.data_rate_mts)

    def pre_burst_ticks(self, state: int) -> int:
        """Row-state-dependent latency before the data burst starts."""
        tcl = ns_to_ticks(self.tcl_ns)
        if state == ROW_HIT:
            return tcl
        trcd = ns_to_ticks(self.trcd_ns)
        if state == ROW_CLOSED:
            return trcd + tcl
        return ns_to_ticks(self.trp_ns) + trcd + tcl


class BankState:
    """Per-bank open row and busy horizon; ``busy_until`` never decreases."""

    __slots__ = ("open_row", "busy_until", "last_activate", "last_use", "last_op")

    def __init__(self):
        self.open_row = -1
        self.busy_until = 0
        self.last_activate = -(1 << 60)
        self.last_use = -(1 << 60)
        self.last_op = "none"


def service_time(request: MemoryRequest, bank: BankState, timing: DramTiming) -> int:
    """DRAM access time for dispatching ``request`` on an idle ``bank``.

    Row hit -> tCL + tBurst; row closed -> tRCD + tCL + tBurst; row conflict
    -> tRP + tRCD + tCL + tBurst.  The controller charges its pipeline
    latency once per request on top of this.
    """
    if bank.open_row < 0:
        state = ROW_CLOSED
    elif bank.open_row == request.row:
        state = ROW_HIT
    else:
        state = ROW_CONFLICT
    return timing.pre_burst_ticks(state) + timing.tburst_ticks


class DramChannel:
    """Runtime state of one DDR channel.

    Request queues are per subchannel (the channel-level capacity splits
    evenly) with an unbounded parked overflow per subchannel feeding them,
    so open-loop injection never drops; write-drain hysteresis is
    channel-wide.
    """

    def __init__(self, timing: DramTiming, channel_id: int = 0):
        self.timing = timing
        self.channel_id = channel_id
        subs = timing.subchannels
        self.read_qs = [[] for _ in range(subs)]
        self.write_qs = [[] for _ in range(subs)]
        self.parked = [[] for _ in range(subs)]
        self._park_heads = [0] * subs
        self.reads_queued = 0
        self.writes_queued = 0
        self.parked_count = 0
        self.banks = [BankState() for _ in range(timing.total_banks)]
        self.bus_free = [0] * subs
        self.bus_last_read = [True] * subs
        self.drain_mode = False
        self.wakeup_tick = None
        self.delivered_bytes = 0
        self.read_bytes = 0
        self.reserved_read = 0
        self.reserved_write = 0
        # downstream response-queue admission control, set by the link layer
        self.rx_gate = None
        # cached tick conversions (hot path)
        t = timing
        self._tburst = t.tburst_ticks
        self._pipeline = ns_to_ticks(t.controller_pipeline_ns)
        self._tras = ns_to_ticks(t.tras_ns)
        self._twr = ns_to_ticks(t.write_recovery_ns)
        self._idle_pre = ns_to_ticks(t.idle_precharge_ns)
        self._ta_to_read = ns_to_ticks(t.write_read_turnaround_ns)
        self._ta_to_write = ns_to_ticks(t.read_write_turnaround_ns)
        self._pre = (t.pre_burst_ticks(ROW_HIT), t.pre_burst_ticks(ROW_CLOSED),
                     t.pre_burst_ticks(ROW_CONFLICT))
        self._fcfs = t.scheduler == SCHED_FCFS
        self._cap = t.starvation_cap
        # commit window: long enough for the slowest row access to book its
        # bus slot ahead of shorter ones, keeping bursts back to back
        self._commit_horizon = self._pre[ROW_CONFLICT] + self._tburst
        self._read_cap = ceil_div(t.read_queue_capacity, subs)
        self._write_cap = ceil_div(t.write_queue_capacity, subs)
        self._drain_high = t.write_drain_high
        self._drain_low = t.write_drain_low
        cols = max(1, t.row_bytes // MemoryRequest.SIZE_BYTES)
        self._cols = cols
        self._subs = subs
        self._banks_per_sub = t.banks_per_subchannel

    # -- address decode ----------------------------------------------------

    def decode(self, req: MemoryRequest, local_line: int) -> None:
        """Fill subchannel/bank/row from the channel-local line index.

        Bit order (low to high after the 64 B line offset, channel bits
        already stripped): subchannel, bank, column, row.
        """
        x, sub = divmod(local_line, self._subs)
        x, bank = divmod(x, self._banks_per_sub)
        row = x // self._cols
        req.subchannel = sub
        req.bank = sub * self._banks_per_sub + bank
        req.row = row

    # -- admission ----------------------------------------------------------

    def has_space(self, is_read: bool, sub: int) -> bool:
        if is_read:
            return (len(self.read_qs[sub]) + self.reserved_read
                    < self._read_cap)
        return (len(self.write_qs[sub]) + self.reserved_write
                < self._write_cap)

    def reserve(self, is_read: bool) -> None:
        """Hold a queue slot for a request in flight on the link."""
        if is_read:
            self.reserved_read += 1
        else:
            self.reserved_write += 1

    def admit_reserved(self, req: MemoryRequest, now: int) -> None:
        if req.is_read:
            self.reserved_read -= 1
            self.reads_queued += 1
        else:
            self.reserved_write -= 1
            self.writes_queued += 1
        req.t_mc_enqueue = now
        (self.read_qs if req.is_read else self.write_qs)[req.subchannel].append(req)

    def offer(self, req: MemoryRequest, now: int) -> bool:
        """Enqueue if there is room; the caller parks the request otherwise."""
        if not self.has_space(req.is_read, req.subchannel):
            return False
        req.t_mc_enqueue = now
        if req.is_read:
            self.read_qs[req.subchannel].append(req)
            self.reads_queued += 1
        else:
            self.write_qs[req.subchannel].append(req)
            self.writes_queued += 1
        return True

    def park(self, req: MemoryRequest) -> None:
        self.parked[req.subchannel].append(req)
        self.parked_count += 1

    def _admit_parked(self, sub: int, now: int) -> None:
        src = self.parked[sub]
        head = self._park_heads[sub]
        while head < len(src) and self.offer(src[head], now):
            src[head] = None
            head += 1
            self.parked_count -= 1
        if head > 4096:
            del src[:head]
            head = 0
        self._park_heads[sub] = head

    def queued(self) -> int:
        return self.reads_queued + self.writes_queued + self.parked_count

    # -- scheduling ---------------------------------------------------------

    def _update_drain_mode(self) -> None:
        wq = self.writes_queued
        if self.drain_mode:
            if wq <= self._drain_low:
                self.drain_mode = False
        elif wq >= self._drain_high:
            self.drain_mode = True

    def _candidate(self, req, now, is_read, bus_check=True):
        """Project one request's (row state, dispatch tick, burst tick).

        The burst tick is when its data would land on the subchannel bus; the
        dispatch tick is just-in-time for that slot.  If the bank's
        idle-precharge timeout expires before the projected dispatch, the row
        counts as closed at that time."""
        bank = self.banks[req.bank]
        pre = self._pre
        pipeline = self._pipeline
        if bank.open_row < 0:
            state = ROW_CLOSED
            t_flip = _FUTURE
        else:
            t_flip = bank.last_use + self._idle_pre
            if now >= t_flip:
                state = ROW_CLOSED
                t_flip = _FUTURE
            else:
                state = ROW_HIT if bank.open_row == req.row else ROW_CONFLICT
        if bus_check:
            bf = self.bus_free[req.subchannel]
            if self.bus_last_read[req.subchannel] != is_read:
                bf += self._ta_to_read if is_read else self._ta_to_write
        else:
            bf = 0
        d0 = bank.busy_until
        if state == ROW_CONFLICT:
            t_pre_ok = bank.last_activate + self._tras
            if t_pre_ok > d0:
                d0 = t_pre_ok
        if d0 < now:
            d0 = now
        burst = d0 + pipeline + pre[state]
        if burst < bf:
            burst = bf
        d = burst - pipeline - pre[state]
        if d >= t_flip:
            # row closes before the projected dispatch
            state = ROW_CLOSED
            d0 = bank.busy_until
            if t_flip > d0:
                d0 = t_flip
            if d0 < now:
                d0 = now
            burst = d0 + pipeline + pre[ROW_CLOSED]
            if burst < bf:
                burst = bf
            d = burst - pipeline - pre[ROW_CLOSED]
        return state, d, burst

    def _scan(self, queue, now, is_read, horizon, bus_check=True):
        """One subchannel-queue pass: the request owning the next data-bus
        slot, its index and row state, and its just-in-time dispatch tick.

        The earliest achievable burst wins the slot; ties go to row state
        (time to data) and then age, which preserves the row-hit-first,
        oldest-first scheduling order at the slot level.  A request bypassed
        beyond the starvation cap is forced ahead of everything the moment
        its own bank and bus slot allow; until then younger requests still
        flow (the cap never idles the channel)."""
        if not self._fcfs and queue[0].bypasses >= self._cap:
            state, d, _ = self._candidate(queue[0], now, is_read, bus_check)
            if d - horizon <= now:
                return queue[0], 0, state, d
        best = None
        best_idx = -1
        best_state = ROW_CLOSED
        best_d = _FUTURE
        best_key = (_FUTURE, 3, _FUTURE)
        limit = 1 if self._fcfs else len(queue)
        for idx in range(limit):
            req = queue[idx]
            state, d, burst = self._candidate(req, now, is_read, bus_check)
            key = (burst, state, req.id)
            if key < best_key:
                best, best_idx, best_state, best_d, best_key = \
                    req, idx, state, d, key
        return best, best_idx, best_state, best_d

    def pick(self, now):
        """Choose the next slot-owning request across all subchannels, or
        report the next tick at which one becomes committable.

        A request commits once its just-in-time dispatch tick falls within
        the commit horizon, so row accesses with longer lead times book their
        bus slot early enough to keep data bursts back to back.  Reads have
        priority unless write-drain mode is active; writes are served outside
        drain mode only when no read is queued (or reads are stalled on the
        response path).

        Returns (request, index, queue, next_wakeup_tick).
        """
        self._update_drain_mode()
        reads_avail = self.reads_queued > 0
        writes_avail = self.writes_queued > 0
        if reads_avail and self.rx_gate is not None and not self.rx_gate():
            # response queue full: reads stall until the link drains
            reads_avail = False
        if self.drain_mode and writes_avail:
            queues, is_read = self.write_qs, False
            horizon = self._commit_horizon
        elif reads_avail:
            queues, is_read = self.read_qs, True
            horizon = self._commit_horizon
        elif writes_avail:
            # opportunistic writes book just-in-time only, so an arriving
            # read never waits behind a convoy of pre-booked writes
            queues, is_read = self.write_qs, False
            horizon = 0
        else:
            return None, -1, None, _FUTURE
        wakeup = _FUTURE
        best = None
        best_idx = -1
        best_queue = None
        for queue in queues:
            if not queue:
                continue
            req, idx, state, d = self._scan(queue, now, is_read, horizon)
            if req is None:
                continue
            if d - horizon <= now:
                # slot owners on distinct subchannels are independent
                if best is None or req.id < best.id:
                    best, best_idx, best_queue = req, idx, queue
            elif d - horizon < wakeup:
                wakeup = d - horizon
        return best, best_idx, best_queue, wakeup

    def dispatch(self, req, idx, queue, now):
        """Commit the request: reserve its bank and bus slot.

        The ledger dispatch tick is just-in-time for the booked burst (the
        moment the request effectively leaves the queue), so queue delay
        keeps counting bus backlog even though the commit happens up to a
        horizon earlier.  Returns the completion tick."""
        bank = self.banks[req.bank]
        state, d_jit, burst_start = self._candidate(req, now, req.is_read)
        done = burst_start + self._tburst
        if state != ROW_HIT:
            # the activate lands tRCD + tCL ahead of the data burst
            bank.last_activate = burst_start - self._pre[ROW_CLOSED]
        bank.open_row = req.row
        bank.busy_until = done + (0 if req.is_read else self._twr)
        bank.last_use = done
        bank.last_op = "read" if req.is_read else "write"
        sub = req.subchannel
        self.bus_free[sub] = done
        self.bus_last_read[sub] = req.is_read
        del queue[idx]
        if req.is_read:
            self.reads_queued -= 1
        else:
            self.writes_queued -= 1
        if idx > 0 and not self._fcfs:
            for i in range(idx):
                queue[i].bypasses += 1
        req.t_dispatch = d_jit
        req.t_dram_done = done
        self._admit_parked(sub, now)
        return done

    def record_delivery(self, req) -> None:
        self.delivered_bytes += MemoryRequest.SIZE_BYTES
        if req.is_read:
            self.read_bytes += MemoryRequest.SIZE_BYTES


def schedule_next(read_queue, write_queue, banks, now, timing: DramTiming):
    """FR-FCFS pick over bank readiness alone (contract-level helper).

    Oldest row-hit request to a ready bank wins; otherwise the oldest request
    to a ready bank.  Reads have priority unless write-drain mode is active
    (high/low watermark hysteresis).  The full channel model additionally
    accounts for data-bus occupancy and turnaround.
    """
    ch = DramChannel(timing)
    ch.banks = list(banks)
    for r in read_queue:
        ch.read_qs[r.subchannel].append(r)
        ch.reads_queued += 1
    for w in write_queue:
        ch.write_qs[w.subchannel].append(w)
        ch.writes_queued += 1
    ch._update_drain_mode()
    if ch.drain_mode and any(ch.write_qs):
        queues, is_read = ch.write_qs, False
    elif any(ch.read_qs):
        queues, is_read = ch.read_qs, True
    else:
        queues, is_read = ch.write_qs, False
    best = None
    best_key = None
    for queue in queues:
        for i, req in enumerate(queue):
            state, d, _ = ch._candidate(req, now, is_read, bus_check=False)
            if d > now:
                continue
            capped = i == 0 and req.bypasses >= ch._cap
            key = (0 if capped else 1, state != ROW_HIT, req.id)
            if best is None or key < best_key:
                best, best_key = req, key
    return best
