"""CXL path model: per-direction goodput-limited serialization with FIFO
occupancy, and a fixed port delay per direction crossing.

Directions are named from the processor's viewpoint: TX carries requests
toward the memory device (reads are an 8-byte command, writes carry the
64-byte line plus command), RX carries 64-byte read-response data back.
The goodput figures already include protocol header overheads, so messages
serialize at payload size unless ``message_overhead_bytes`` is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .engine import EventKind, MemoryRequest, ns_to_ticks
from .errors import ConfigError

TX = "tx"
RX = "rx"

READ_REQUEST_BYTES = 8
WRITE_REQUEST_BYTES = MemoryRequest.SIZE_BYTES + 8
READ_RESPONSE_BYTES = MemoryRequest.SIZE_BYTES


@dataclass(frozen=True)
class CxlLinkConfig:
    """Lane provisioning and timing of one bidirectional serial link.

    The symmetric x8 preset spends 16 + 16 pins for 32/32 GB/s raw and
    26/13 GB/s RX/TX goodput; the asymmetric variant re-splits the same 32
    pins into 20 RX + 12 TX for 40/24 GB/s raw and 32/10 GB/s goodput.
    ``tx_data_serialization_ns`` pins the wire time of data-bearing TX
    messages (writes) to a constant instead of size/goodput arithmetic.
    """

    name: str = "x8"
    rx_pins: int = 16
    tx_pins: int = 16
    raw_rx_gbps: float = 32.0
    raw_tx_gbps: float = 32.0
    goodput_rx_gbps: float = 26.0
    goodput_tx_gbps: float = 13.0
    port_delay_rx_ns: float = 12.0
    port_delay_tx_ns: float = 12.0
    message_overhead_bytes: int = 0
    fifo_capacity: int = 64
    tx_data_serialization_ns: float | None = None

    @property
    def pins(self) -> int:
        return self.rx_pins + self.tx_pins


X8 = CxlLinkConfig()

X8_ASYM = CxlLinkConfig(
    name="x8-asym",
    rx_pins=20,
    tx_pins=12,
    raw_rx_gbps=40.0,
    raw_tx_gbps=24.0,
    goodput_rx_gbps=32.0,
    goodput_tx_gbps=10.0,
    tx_data_serialization_ns=9.0,
)

LINK_PRESETS = {"x8": X8, "x8-asym": X8_ASYM}


def serialize(direction: str, payload_bytes: int, config: CxlLinkConfig) -> int:
    """Wire time in ticks for a message, rounded up to whole picoseconds."""
    if payload_bytes < 0:
        raise ConfigError("payload size must be non-negative")
    goodput = config.goodput_rx_gbps if direction == RX else config.goodput_tx_gbps
    if goodput <= 0:
        raise ConfigError(f"{direction} goodput must be positive")
    total = payload_bytes + config.message_overhead_bytes
    if total == 0:
        return 0
    if (direction == TX and config.tx_data_serialization_ns is not None
            and payload_bytes >= MemoryRequest.SIZE_BYTES):
        return ns_to_ticks(config.tx_data_serialization_ns)
    # bytes / (GB/s) = bytes * 1000 ps
    return math.ceil(total * 1000 / goodput)


def uncontended_read_trip_ticks(config: CxlLinkConfig) -> int:
    """Link-added latency of an idle-link read round trip (ledger identity)."""
    return (ns_to_ticks(config.port_delay_tx_ns)
            + serialize(TX, READ_REQUEST_BYTES, config)
            + ns_to_ticks(config.port_delay_rx_ns)
            + serialize(RX, READ_RESPONSE_BYTES, config))


def with_round_trip_overhead(config: CxlLinkConfig, target_ns: float) -> CxlLinkConfig:
    """Rescale only the port delays so an uncontended read round trip adds
    ``target_ns``; serialization and goodput stay untouched."""
    ser = (serialize(TX, READ_REQUEST_BYTES, config)
           + serialize(RX, READ_RESPONSE_BYTES, config))
    ports = ns_to_ticks(target_ns) - ser
    if ports < 0:
        raise ConfigError(
            f"target overhead {target_ns} ns is below the serialization floor "
            f"({ser / 1000:.3f} ns)")
    port_tx = ports // 2
    return replace(config,
                   port_delay_tx_ns=port_tx / 1000,
                   port_delay_rx_ns=(ports - port_tx) / 1000)


class CxlLink:
    """Runtime state of one link: per-direction FIFO, wire, and counters.

    A direction serializes one message at a time.  The TX wire only starts a
    message once the device-side controller queue can admit it (slot reserved
    at wire start), so a full controller queue backpressures the link and,
    transitively, the injection source.  Read responses reserve their RX slot
    at DRAM dispatch time; a full RX FIFO therefore stalls read dispatch
    rather than dropping data.
    """

    def __init__(self, config: CxlLinkConfig, path_id: int = 0):
        self.config = config
        self.path_id = path_id
        self.tx_fifo: list[MemoryRequest] = []
        self._tx_head = 0
        self.rx_fifo: list[MemoryRequest] = []
        self._rx_head = 0
        self.tx_busy = False
        self.rx_busy = False
        self.rx_held = 0
        self.source_q: list[MemoryRequest] = []
        self._source_head = 0
        self.tx_busy_ticks = 0
        self.rx_busy_ticks = 0
        self.tx_bytes = 0
        self.rx_bytes = 0
        self._port_tx = ns_to_ticks(config.port_delay_tx_ns)
        self._port_rx = ns_to_ticks(config.port_delay_rx_ns)
        self._ser_read_req = serialize(TX, READ_REQUEST_BYTES, config)
        self._ser_write_req = serialize(TX, WRITE_REQUEST_BYTES, config)
        self._ser_response = serialize(RX, READ_RESPONSE_BYTES, config)
        self._cap = config.fifo_capacity

    # -- TX: processor -> device --------------------------------------------

    def tx_queued(self) -> int:
        return len(self.tx_fifo) - self._tx_head

    def offer_tx(self, req: MemoryRequest) -> bool:
        if self.tx_queued() >= self._cap:
            return False
        self.tx_fifo.append(req)
        return True

    def park(self, req: MemoryRequest) -> None:
        self.source_q.append(req)

    def _refill_tx(self) -> None:
        src = self.source_q
        head = self._source_head
        while head < len(src) and self.tx_queued() < self._cap:
            self.tx_fifo.append(src[head])
            src[head] = None
            head += 1
        if head > 4096:
            del src[:head]
            head = 0
        self._source_head = head

    def pending_tx(self) -> int:
        return self.tx_queued() + len(self.source_q) - self._source_head

    def try_start_tx(self, now: int, sim, channels) -> None:
        """Start serializing the head TX message if the wire is idle and the
        target controller queue has room (slot reserved here)."""
        if self.tx_busy:
            return
        self._refill_tx()
        if self._tx_head >= len(self.tx_fifo):
            return
        req = self.tx_fifo[self._tx_head]
        channel = channels[req.channel]
        if not channel.has_space(req.is_read, req.subchannel):
            return
        channel.reserve(req.is_read)
        self.tx_fifo[self._tx_head] = None
        self._tx_head += 1
        if self._tx_head > 4096:
            del self.tx_fifo[:self._tx_head]
            self._tx_head = 0
        ser = self._ser_read_req if req.is_read else self._ser_write_req
        self.tx_busy = True
        self.tx_busy_ticks += ser
        self.tx_bytes += (READ_REQUEST_BYTES if req.is_read else WRITE_REQUEST_BYTES)
        req.t_tx_depart = now
        req.t_tx_arrive = now + ser + self._port_tx
        req.port_tx = self._port_tx
        sim.schedule(now + ser, EventKind.LINK_DEPART, req.id, (self, TX))
        sim.schedule(req.t_tx_arrive, EventKind.MC_ENQUEUE, req.id, req)

    # -- RX: device -> processor ---------------------------------------------

    def rx_has_room(self) -> bool:
        return self.rx_held < self._cap

    def hold_rx_slot(self) -> None:
        self.rx_held += 1

    def queue_response(self, req: MemoryRequest, now: int, sim) -> None:
        req.t_rx_ready = now
        self.rx_fifo.append(req)
        self.try_start_rx(now, sim)

    def try_start_rx(self, now: int, sim) -> bool:
        """Returns True when a held RX slot was released (a read may dispatch)."""
        if self.rx_busy or self._rx_head >= len(self.rx_fifo):
            return False
        req = self.rx_fifo[self._rx_head]
        self.rx_fifo[self._rx_head] = None
        self._rx_head += 1
        if self._rx_head > 4096:
            del self.rx_fifo[:self._rx_head]
            self._rx_head = 0
        self.rx_held -= 1
        ser = self._ser_response
        self.rx_busy = True
        self.rx_busy_ticks += ser
        self.rx_bytes += READ_RESPONSE_BYTES
        req.t_rx_depart = now
        req.port_rx = self._port_rx
        sim.schedule(now + ser, EventKind.LINK_DEPART, req.id, (self, RX))
        sim.schedule(now + ser + self._port_rx, EventKind.COMPLETE, req.id, req)
        return True
