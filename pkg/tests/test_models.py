import pytest
from hypothesis import given, strategies as st

from memqsim.errors import ConfigError
from memqsim.models import (DDR5_4800, PCIE5_LANE, PCIE5_X8, PCIE5_X12,
                            InterfaceSpec, PowerConfig, bandwidth_per_pin, edp,
                            pin_comparison, system_power)


def test_ddr5_bandwidth_per_pin():
    assert bandwidth_per_pin(DDR5_4800) == pytest.approx(0.24)


def test_pcie5_bandwidth_per_pin_per_direction():
    assert bandwidth_per_pin(PCIE5_LANE) == pytest.approx(1.0)
    assert bandwidth_per_pin(PCIE5_X8) == pytest.approx(1.0)
    assert bandwidth_per_pin(PCIE5_X12) == pytest.approx(1.0)


def test_pin_comparison_ratio_and_replacement():
    cmp = pin_comparison()
    assert cmp["per_pin_ratio"] >= 4.0
    assert cmp["per_pin_ratio"] == pytest.approx(1.0 / 0.24)
    assert cmp["pin_replacement_factor"] == pytest.approx(5.0)


def test_invalid_interface_rejected():
    with pytest.raises(ConfigError):
        InterfaceSpec("bad", pins=0, bandwidth_gbps=1.0)


def test_baseline_system_power():
    pb = system_power(ddr_channels=12, pcie_lanes=0, dimm_power_w=200.0)
    assert pb.ddr_w == pytest.approx(13.2)
    assert pb.total_w == pytest.approx(713.2)
    assert abs(pb.total_w - 713.0) <= 1.0


def test_cxl_system_power():
    pb = system_power(ddr_channels=48, pcie_lanes=384, dimm_power_w=551.0)
    assert pb.ddr_w == pytest.approx(52.8)
    assert pb.lane_w == pytest.approx(76.8)
    assert pb.total_w == pytest.approx(1180.6)
    assert abs(pb.total_w - 1180.0) <= 1.0


def test_power_components_sum_exactly():
    pb = system_power(7, 13, 42.5)
    assert pb.total_w == pb.package_w + pb.ddr_w + pb.lane_w + pb.dimm_w


def test_zero_counts_leave_package_only():
    pb = system_power(0, 0, 0.0)
    assert pb.total_w == PowerConfig().package_w


@given(st.integers(0, 100), st.integers(0, 1000), st.floats(0, 1000))
def test_power_is_linear_in_counts(ch, lanes, dimm):
    one = system_power(ch, lanes, dimm)
    two = system_power(2 * ch, 2 * lanes, 2 * dimm)
    scale_free = PowerConfig().package_w
    assert two.total_w - scale_free == pytest.approx(
        2 * (one.total_w - scale_free))


def test_edp_matches_published_totals():
    base = edp(713.0, 2.02)
    alt = edp(1180.0, 1.33)
    assert abs(base.edp - 2909.0) <= 1.0
    assert abs(alt.edp - 2087.0) <= 1.0
    assert alt.edp / base.edp == pytest.approx(0.72, abs=0.005)


def test_edp_unit_cpi_is_power():
    assert edp(321.0, 1.0).edp == 321.0


def test_edp_rejects_non_positive():
    with pytest.raises(ConfigError):
        edp(0.0, 1.0)
    with pytest.raises(ConfigError):
        edp(100.0, -1.0)


def test_negative_power_counts_rejected():
    with pytest.raises(ConfigError):
        system_power(-1, 0, 0.0)
