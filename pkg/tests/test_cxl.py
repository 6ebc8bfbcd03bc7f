import numpy as np
import pytest

from memqsim import analysis
from memqsim.cxl import (LINK_PRESETS, READ_REQUEST_BYTES, READ_RESPONSE_BYTES,
                         RX, TX, WRITE_REQUEST_BYTES, CxlLinkConfig, X8,
                         X8_ASYM, serialize, uncontended_read_trip_ticks,
                         with_round_trip_overhead)
from memqsim.errors import ConfigError
from memqsim.rng import Rng
from memqsim.simulation import MemorySystem
from memqsim.topology import build
from memqsim.traffic import OpenLoopSpec, gen_open_loop


def test_presets_pin_budget():
    assert X8.pins == 32 and X8_ASYM.pins == 32
    assert (X8.rx_pins, X8.tx_pins) == (16, 16)
    assert (X8_ASYM.rx_pins, X8_ASYM.tx_pins) == (20, 12)
    assert (X8.goodput_rx_gbps, X8.goodput_tx_gbps) == (26.0, 13.0)
    assert (X8_ASYM.goodput_rx_gbps, X8_ASYM.goodput_tx_gbps) == (32.0, 10.0)


def test_serialization_arithmetic():
    # 64 B at 26 GB/s ~ 2.46 ns
    assert serialize(RX, 64, X8) == 2462
    # asym RX: 64 / 32 GB/s = 2.0 ns
    assert serialize(RX, 64, X8_ASYM) == 2000
    assert serialize(TX, 0, X8) == 0
    # write message: (64+8) B at 13 GB/s ~ 5.54 ns, matching the x8 wire time
    assert serialize(TX, WRITE_REQUEST_BYTES, X8) == 5539
    # the asym preset pins data-bearing TX messages at 9 ns
    assert serialize(TX, WRITE_REQUEST_BYTES, X8_ASYM) == 9000
    # 8 B read requests stay size-based
    assert serialize(TX, READ_REQUEST_BYTES, X8_ASYM) == 800


def test_zero_goodput_rejected():
    bad = CxlLinkConfig(goodput_rx_gbps=0.0)
    with pytest.raises(ConfigError):
        serialize(RX, 64, bad)


def test_round_trip_overhead_knob_scales_ports_only():
    cfg = with_round_trip_overhead(X8, 50.0)
    assert cfg.goodput_rx_gbps == X8.goodput_rx_gbps
    assert cfg.goodput_tx_gbps == X8.goodput_tx_gbps
    assert uncontended_read_trip_ticks(cfg) == 50_000
    with pytest.raises(ConfigError):
        with_round_trip_overhead(X8, 0.001)


def run_single_read(topo_name, **build_kw):
    topo = build(topo_name, **build_kw)
    spec = OpenLoopSpec(rate_bytes_per_s=1e9, request_count=1,
                        read_fraction=1.0)
    system = MemorySystem(topo, gen_open_loop(spec, Rng(1)))
    return system.run().completed[0]


def test_uncontended_round_trip_adds_about_30ns():
    base = run_single_read("ddr-baseline").total_latency()
    linked = run_single_read("coaxial-4x").total_latency()
    added_ns = (linked - base) / 1000
    assert 27.0 <= added_ns <= 33.0


def test_link_ledger_identity_for_uncontended_read():
    req = run_single_read("coaxial-2x")
    q, s, ports, wire = analysis.request_components_ticks(req)
    assert ports == 24_000
    assert wire == (serialize(TX, READ_REQUEST_BYTES, X8)
                    + serialize(RX, READ_RESPONSE_BYTES, X8))
    assert q == 0
    assert q + s + ports + wire == req.total_latency()
    assert uncontended_read_trip_ticks(X8) == ports + wire


def test_baseline_has_zero_link_ledger_fields():
    req = run_single_read("ddr-baseline")
    assert req.t_tx_depart == 0 and req.t_rx_depart == 0
    assert req.port_tx == 0 and req.port_rx == 0
    _, _, ports, wire = analysis.request_components_ticks(req)
    assert ports == 0 and wire == 0


def test_simultaneous_responses_serialize():
    # two reads finishing DRAM together: second response departs one
    # serialization later
    topo = build("coaxial-2x")
    spec = OpenLoopSpec(rate_bytes_per_s=30e9, request_count=2000,
                        arrival="batched", batch_mean=16, read_fraction=1.0)
    system = MemorySystem(topo, gen_open_loop(spec, Rng(3)))
    trace = system.run()
    by_link = {}
    for r in trace.completed:
        by_link.setdefault(r.path, []).append(r)
    ser = serialize(RX, READ_RESPONSE_BYTES, X8)
    for reqs in by_link.values():
        departs = sorted(r.t_rx_depart for r in reqs)
        gaps = np.diff(departs)
        assert gaps.min() >= ser


def test_rx_overload_clamps_utilization_and_grows_backlog():
    # sustained demand over RX goodput: the backlog grows without bound and
    # the wire saturates
    topo = build("coaxial-2x")
    rate = 2 * (X8.goodput_rx_gbps * 1e9) * 2  # far beyond both links' RX
    spec = OpenLoopSpec(rate_bytes_per_s=rate, request_count=30_000,
                        read_fraction=1.0)
    stream = gen_open_loop(spec, Rng(4), topo.aggregate_peak_bytes_per_s)
    system = MemorySystem(topo, stream)
    system.run(max_tick=30_000_000)
    link = system.links[0]
    backlog = link.pending_tx()
    assert backlog > 1000
    rx_util = link.rx_busy_ticks / system.sim.clock
    assert 0.97 <= rx_util <= 1.0


def test_per_direction_goodput_never_exceeded():
    topo = build("coaxial-2x")
    spec = OpenLoopSpec(rate_bytes_per_s=60e9, request_count=40_000,
                        read_fraction=0.67)
    stream = gen_open_loop(spec, Rng(5), topo.aggregate_peak_bytes_per_s)
    system = MemorySystem(topo, stream)
    trace = system.run()
    for link in system.links:
        window = trace.final_clock * 1e-12
        assert link.rx_bytes / window <= X8.goodput_rx_gbps * 1e9 * 1.01
        assert link.tx_bytes / window <= X8.goodput_tx_gbps * 1e9 * 1.01


def test_link_preset_names():
    assert set(LINK_PRESETS) == {"x8", "x8-asym"}
