import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memqsim.errors import ConfigError
from memqsim.rng import Rng
from memqsim.traffic import (ClosedLoopCoreSpec, OpenLoopSpec,
                             SyntheticLatencySpec, gen_open_loop, load_trace,
                             run_core_model, run_variance_experiment,
                             standard_variance_distributions,
                             synthetic_latency)

RATE_60PCT = 0.6 * 38.4e9


def test_mean_inter_arrival_matches_rate():
    # 64 B at 60% of 38.4 GB/s -> 2.78 ns between requests
    spec = OpenLoopSpec(rate_bytes_per_s=RATE_60PCT, request_count=200_000)
    stream = gen_open_loop(spec, Rng(0))
    expected_ps = 64 / RATE_60PCT * 1e12
    assert expected_ps == pytest.approx(2777.8, abs=0.1)
    mean_gap = np.diff(stream.ticks).mean()
    assert mean_gap == pytest.approx(expected_ps, rel=0.01)


def test_read_fraction_one_yields_no_writes():
    spec = OpenLoopSpec(rate_bytes_per_s=1e9, request_count=5000,
                        read_fraction=1.0)
    stream = gen_open_loop(spec, Rng(1))
    assert bool(stream.is_read.all())


def test_uniform_addresses_spread_over_banks():
    # brute count: each of 32 banks gets 3.125% +- 0.1% of 1e6 draws
    spec = OpenLoopSpec(rate_bytes_per_s=10e9, request_count=1_000_000)
    stream = gen_open_loop(spec, Rng(2))
    banks = stream.lines % 32
    counts = np.bincount(banks, minlength=32)
    shares = counts / len(stream)
    assert shares.min() >= 0.03125 - 0.001
    assert shares.max() <= 0.03125 + 0.001


def test_achieved_rate_within_one_percent_over_1e6():
    for arrival in ("exponential", "batched"):
        spec = OpenLoopSpec(rate_bytes_per_s=RATE_60PCT, request_count=1_000_000,
                            arrival=arrival, batch_mean=8)
        stream = gen_open_loop(spec, Rng(3))
        achieved = stream.achieved_rate_bytes_per_s()
        assert achieved == pytest.approx(RATE_60PCT, rel=0.01)


def test_fixed_arrival_is_constant():
    spec = OpenLoopSpec(rate_bytes_per_s=1e9, request_count=100,
                        arrival="fixed")
    stream = gen_open_loop(spec, Rng(4))
    gaps = np.unique(np.diff(stream.ticks))
    assert len(gaps) == 1


def test_onoff_preserves_mean_rate():
    spec = OpenLoopSpec(rate_bytes_per_s=RATE_60PCT, request_count=500_000,
                        arrival="onoff")
    stream = gen_open_loop(spec, Rng(5))
    assert stream.achieved_rate_bytes_per_s() == pytest.approx(RATE_60PCT,
                                                               rel=0.02)


def test_stride_pattern_is_sequential():
    spec = OpenLoopSpec(rate_bytes_per_s=1e9, request_count=10,
                        address_pattern="stride", stride_bytes=128)
    stream = gen_open_loop(spec, Rng(6))
    assert list(stream.lines[:4]) == [0, 2, 4, 6]


def test_overload_warning():
    topo_peak = 38.4e9
    spec = OpenLoopSpec(rate_bytes_per_s=11 * topo_peak, request_count=10)
    with pytest.warns(UserWarning, match="queues will saturate"):
        gen_open_loop(spec, Rng(7), downstream_peak_bytes_per_s=topo_peak)


def test_spec_validation():
    with pytest.raises(ConfigError):
        OpenLoopSpec(rate_bytes_per_s=1e9, read_fraction=1.5)
    with pytest.raises(ConfigError):
        OpenLoopSpec(rate_bytes_per_s=0.0)
    with pytest.raises(ConfigError):
        OpenLoopSpec(rate_bytes_per_s=1e9, arrival="weird")


# -- trace replay ---------------------------------------------------------------


def test_trace_round_trip(tmp_path):
    path = tmp_path / "t.trace"
    path.write_text("# comment\n"
                    "1000 0 R 1fc0\n"
                    "2000 3 W ff80\n")
    stream = load_trace(str(path))
    assert list(stream.ticks) == [1000, 2000]
    assert list(stream.source) == [0, 3]
    assert list(stream.is_read) == [True, False]
    assert stream.lines[0] * 64 == 0x1fc0


@pytest.mark.parametrize("line", ["bad line", "1000 0 X 1fc0", "1000 0 R zz"])
def test_trace_rejects_malformed_lines(tmp_path, line):
    path = tmp_path / "t.trace"
    path.write_text(line + "\n")
    with pytest.raises(ConfigError):
        load_trace(str(path))


def test_trace_rejects_unsorted_ticks(tmp_path):
    path = tmp_path / "t.trace"
    path.write_text("2000 0 R 0\n1000 0 R 40\n")
    with pytest.raises(ConfigError, match="non-decreasing"):
        load_trace(str(path))


# -- synthetic latency backends ---------------------------------------------------


def test_bimodal_mean_over_1e6_draws():
    spec = SyntheticLatencySpec.bimodal(100.0, 350.0, 0.8)
    draws = spec.draw_ticks(1_000_000, Rng(8)) / 1000
    assert draws.mean() == pytest.approx(150.0, abs=0.5)


def test_bimodal_stdev_analytic_and_empirical():
    spec = SyntheticLatencySpec.bimodal(50.0, 550.0, 0.8)
    assert spec.stdev_ns == pytest.approx(200.0, abs=1e-9)
    draws = spec.draw_ticks(1_000_000, Rng(9)) / 1000
    assert draws.std() == pytest.approx(200.0, abs=1.0)


def test_fixed_draws_are_constant():
    spec = SyntheticLatencySpec.fixed(150.0)
    draws = spec.draw_ticks(1000, Rng(10))
    assert set(draws.tolist()) == {150_000}
    assert synthetic_latency(spec, Rng(11)) == 150_000


def test_standard_distributions_share_the_mean():
    dists = standard_variance_distributions()
    assert [round(d.stdev_ns, 6) for d in dists] == [0.0, 100.0, 150.0, 200.0]
    for d in dists:
        assert d.mean_ns == pytest.approx(150.0, abs=1e-9)


# -- closed-loop core model -------------------------------------------------------


def test_no_misses_gives_full_issue_width():
    spec = ClosedLoopCoreSpec(cores=1, miss_prob=0.0)
    res = run_core_model(spec, SyntheticLatencySpec.fixed(150.0), 100_000,
                         Rng(12))
    assert res.ipc == pytest.approx(4.0)


def test_serialized_misses_ipc():
    # every instruction misses, one MSHR: IPC -> 1/(150 ns * 2 GHz) = 1/300
    spec = ClosedLoopCoreSpec(cores=1, miss_prob=1.0, mshrs=1)
    res = run_core_model(spec, SyntheticLatencySpec.fixed(150.0), 30_000,
                         Rng(13))
    assert res.ipc == pytest.approx(1 / 300, rel=0.01)


def test_mlp1_depends_only_on_mean_latency():
    # closed form at MLP=1: IPC ~ 1/E[L]; equal-mean backends within 1%
    spec = ClosedLoopCoreSpec(cores=1, miss_prob=1.0, mshrs=1)
    ipcs = [run_core_model(spec, d, 100_000, Rng(14)).ipc
            for d in standard_variance_distributions()]
    for ipc in ipcs[1:]:
        assert ipc == pytest.approx(ipcs[0], rel=0.01)


def test_ipc_non_increasing_in_backend_latency():
    spec = ClosedLoopCoreSpec(cores=1, miss_prob=0.05, mshrs=8)
    ipcs = [run_core_model(spec, SyntheticLatencySpec.fixed(lat), 50_000,
                           Rng(15)).ipc
            for lat in (50.0, 100.0, 200.0, 400.0)]
    assert all(a >= b for a, b in zip(ipcs, ipcs[1:]))


@settings(max_examples=12, deadline=None)
@given(miss_prob=st.floats(0.0, 1.0), mshrs=st.integers(1, 32),
       width=st.integers(1, 8))
def test_ipc_never_exceeds_issue_width(miss_prob, mshrs, width):
    spec = ClosedLoopCoreSpec(cores=1, issue_width=width, mshrs=mshrs,
                              miss_prob=miss_prob)
    res = run_core_model(spec, SyntheticLatencySpec.fixed(100.0), 5_000,
                         Rng(16))
    assert res.ipc <= width + 1e-9


def test_write_misses_do_not_block_retire():
    spec_r = ClosedLoopCoreSpec(cores=1, miss_prob=0.05, mshrs=8)
    spec_w = ClosedLoopCoreSpec(cores=1, miss_prob=0.05, mshrs=8,
                                write_prob=1.0)
    backend = SyntheticLatencySpec.fixed(300.0)
    ipc_r = run_core_model(spec_r, backend, 30_000, Rng(17)).ipc
    ipc_w = run_core_model(spec_w, backend, 30_000, Rng(17)).ipc
    assert ipc_w > ipc_r


def test_dependencies_serialize_misses():
    base = ClosedLoopCoreSpec(cores=1, miss_prob=0.1, mshrs=16)
    dep = ClosedLoopCoreSpec(cores=1, miss_prob=0.1, mshrs=16,
                             dependency_prob=0.9)
    backend = SyntheticLatencySpec.fixed(200.0)
    assert (run_core_model(dep, backend, 30_000, Rng(18)).ipc
            < run_core_model(base, backend, 30_000, Rng(18)).ipc)


def test_zero_mshrs_rejected():
    with pytest.raises(ConfigError):
        ClosedLoopCoreSpec(mshrs=0)


def test_variance_experiment_requires_equal_means():
    with pytest.raises(ConfigError, match="mean"):
        run_variance_experiment(
            ClosedLoopCoreSpec(cores=1),
            [SyntheticLatencySpec.fixed(150.0),
             SyntheticLatencySpec.bimodal(100.0, 400.0, 0.8)],
            10_000, Rng(19))


def test_variance_experiment_fixed_baseline_is_one():
    rows = run_variance_experiment(
        ClosedLoopCoreSpec(cores=1),
        [SyntheticLatencySpec.fixed(150.0), SyntheticLatencySpec.fixed(150.0)],
        20_000, Rng(20))
    assert rows[0].relative_ipc == 1.0
    assert rows[1].relative_ipc == pytest.approx(1.0)


def test_variance_strictly_decreasing_for_mlp4():
    core = ClosedLoopCoreSpec(cores=2, mshrs=4, miss_prob=0.04)
    rows = run_variance_experiment(core, standard_variance_distributions(),
                                   150_000, Rng(21))
    rel = [r.relative_ipc for r in rows]
    assert all(a > b for a, b in zip(rel, rel[1:]))
