"""Closed-form side models: bandwidth-per-pin arithmetic for parallel vs
serial memory interfaces, and the system power / energy-delay-product model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class InterfaceSpec:
    """Pin cost and bandwidth of one processor memory interface.

    ``directions_counted`` records whether the bandwidth figure is the
    combined read+write peak (parallel buses) or per direction (serial
    lanes).
    """

    name: str
    pins: int
    bandwidth_gbps: float
    directions_counted: str = "both"  # "both" (combined) | "one" (per direction)

    def __post_init__(self):
        if self.pins <= 0:
            raise ConfigError("interface needs a positive pin count")


DDR5_4800 = InterfaceSpec("DDR5-4800", pins=160, bandwidth_gbps=38.4,
                          directions_counted="both")
PCIE5_LANE = InterfaceSpec("PCIe5-lane", pins=4, bandwidth_gbps=4.0,
                           directions_counted="one")
PCIE5_X8 = InterfaceSpec("PCIe5-x8", pins=32, bandwidth_gbps=32.0,
                         directions_counted="one")
PCIE5_X12 = InterfaceSpec("PCIe5-x12", pins=48, bandwidth_gbps=48.0,
                          directions_counted="one")

BUILTIN_INTERFACES = (DDR5_4800, PCIE5_LANE, PCIE5_X8, PCIE5_X12)


def bandwidth_per_pin(spec: InterfaceSpec) -> float:
    """GB/s per processor pin (per direction for serial interfaces)."""
    return spec.bandwidth_gbps / spec.pins


def pin_comparison(serial: InterfaceSpec = PCIE5_X8,
                   parallel: InterfaceSpec = DDR5_4800) -> dict:
    """Per-pin bandwidth ratio and the per-channel pin replacement factor."""
    return {
        "serial": serial.name,
        "parallel": parallel.name,
        "serial_gbps_per_pin": bandwidth_per_pin(serial),
        "parallel_gbps_per_pin": bandwidth_per_pin(parallel),
        "per_pin_ratio": bandwidth_per_pin(serial) / bandwidth_per_pin(parallel),
        "pin_replacement_factor": parallel.pins / serial.pins,
    }


@dataclass(frozen=True)
class PowerConfig:
    """Component power model for a full-scale (144-core class) server."""

    package_w: float = 500.0
    per_ddr_ctrl_w: float = 0.5
    per_ddr_phy_w: float = 0.6
    per_pcie_lane_w: float = 0.2


@dataclass(frozen=True)
class PowerBreakdown:
    package_w: float
    ddr_w: float
    lane_w: float
    dimm_w: float

    @property
    def total_w(self) -> float:
        return self.package_w + self.ddr_w + self.lane_w + self.dimm_w

    def to_dict(self) -> dict:
        return {"package_w": self.package_w, "ddr_ctrl_phy_w": self.ddr_w,
                "cxl_lane_w": self.lane_w, "dimm_w": self.dimm_w,
                "total_w": self.total_w}


def system_power(ddr_channels: int, pcie_lanes: int, dimm_power_w: float,
                 cfg: PowerConfig = PowerConfig()) -> PowerBreakdown:
    """Package + per-channel controller/PHY + per-lane interface + DIMM power.

    Linear in each count; components are reported separately and sum exactly.
    """
    if ddr_channels < 0 or pcie_lanes < 0 or dimm_power_w < 0:
        raise ConfigError("power model counts must be non-negative")
    ddr = ddr_channels * (cfg.per_ddr_ctrl_w + cfg.per_ddr_phy_w)
    lanes = pcie_lanes * cfg.per_pcie_lane_w
    return PowerBreakdown(cfg.package_w, ddr, lanes, dimm_power_w)


@dataclass(frozen=True)
class EdpResult:
    total_power_w: float
    cpi: float

    @property
    def edp(self) -> float:
        return self.total_power_w * self.cpi ** 2

    def to_dict(self) -> dict:
        return {"total_power_w": self.total_power_w, "cpi": self.cpi,
                "edp": self.edp}


def edp(power_w: float, cpi: float) -> EdpResult:
    """Energy-delay product: system power x CPI^2 (lower is better)."""
    if power_w <= 0 or cpi <= 0:
        raise ConfigError("power and CPI must be positive")
    return EdpResult(power_w, cpi)
