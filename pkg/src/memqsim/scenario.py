"""Scenario files: YAML documents describing one experiment's configuration.

Every field has a default except the experiment kind, which comes from the
CLI subcommand.  Unknown keys are rejected so a typo cannot silently fall
back to a default, and the effective configuration is echoed verbatim into
every report header.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any

import yaml

from .dram import DramTiming
from .errors import ConfigError
from .topology import PRESETS, build
from .traffic import ClosedLoopCoreSpec, OpenLoopSpec, SyntheticLatencySpec

BASELINE_PEAK_BYTES_PER_S = DramTiming().peak_bytes_per_s


def _take(mapping: dict, context: str, **specs):
    """Pop known keys with type coercion; reject anything left over."""
    out = {}
    for key, (caster, default) in specs.items():
        if key in mapping:
            raw = mapping.pop(key)
            try:
                out[key] = caster(raw) if raw is not None else None
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{context}.{key}: {exc}") from None
        else:
            out[key] = default
    if mapping:
        bad = ", ".join(sorted(map(str, mapping)))
        raise ConfigError(f"unknown key(s) under {context}: {bad}")
    return out


@dataclass
class TrafficConfig:
    kind: str = "open-loop"          # open-loop | trace
    utilization: float | None = 0.5  # fraction of the DDR baseline peak
    rate_gbps: float | None = None   # absolute rate; overrides utilization
    request_count: int = 200_000
    arrival: str = "exponential"
    batch_mean: float = 8.0
    read_fraction: float = 0.67
    address_pattern: str = "uniform"
    stride_bytes: int = 64
    on_us: float = 10.0
    off_us: float = 10.0
    on_rate_factor: float = 2.0
    address_space_gib: float = 128.0
    trace_path: str | None = None

    def rate_bytes_per_s(self) -> float:
        if self.rate_gbps is not None:
            return self.rate_gbps * 1e9
        if self.utilization is None:
            raise ConfigError("traffic needs a utilization or rate_gbps")
        if not 0.0 < self.utilization < 1.0:
            raise ConfigError(
                f"utilization {self.utilization} outside (0, 1): the queue "
                "would be unstable")
        return self.utilization * BASELINE_PEAK_BYTES_PER_S

    def open_loop_spec(self, request_count: int | None = None,
                       rate: float | None = None) -> OpenLoopSpec:
        return OpenLoopSpec(
            rate_bytes_per_s=rate if rate is not None else self.rate_bytes_per_s(),
            request_count=request_count or self.request_count,
            arrival=self.arrival,
            batch_mean=self.batch_mean,
            on_ticks=round(self.on_us * 1e6),
            off_ticks=round(self.off_us * 1e6),
            on_rate_factor=self.on_rate_factor,
            address_pattern=self.address_pattern,
            stride_bytes=self.stride_bytes,
            read_fraction=self.read_fraction,
            address_space_bytes=round(self.address_space_gib * (1 << 30)),
        )


@dataclass
class SweepConfig:
    utilizations: tuple = (0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    request_count: int = 120_000


@dataclass
class CompareConfig:
    topo_a: str = "ddr-baseline"
    topo_b: str = "coaxial-4x"
    arrival: str = "batched"


@dataclass
class AsymConfig:
    rate_gbps: float = 57.6
    read_fraction: float = 0.67
    request_count: int = 120_000


@dataclass
class VarianceConfig:
    instructions: int = 400_000
    core: ClosedLoopCoreSpec = field(default_factory=ClosedLoopCoreSpec)
    distributions: list = field(default_factory=list)


@dataclass
class PowerCase:
    name: str
    ddr_channels: int
    pcie_lanes: int
    dimm_w: float
    cpi: float


@dataclass
class Scenario:
    """Everything one experiment needs; the experiment kind is external."""

    experiment: str | None = None
    seed: int = 42
    topology: Any = "ddr-baseline"
    interleave_granularity: int = 64
    cxl_overhead_ns: float | None = None
    warmup_fraction: float = 0.1
    out_dir: str = "out"
    report_format: str = "both"
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    asym: AsymConfig = field(default_factory=AsymConfig)
    variance: VarianceConfig = field(default_factory=VarianceConfig)
    timing_overrides: dict = field(default_factory=dict)
    link_overrides: dict = field(default_factory=dict)
    power_cases: list = field(default_factory=list)

    def build_topology(self, name: Any = None):
        return build(name if name is not None else self.topology,
                     timing_overrides=self.timing_overrides or None,
                     link_overrides=self.link_overrides or None,
                     cxl_round_trip_ns=self.cxl_overhead_ns)

    def variance_distributions(self) -> list[SyntheticLatencySpec]:
        from .traffic import standard_variance_distributions
        if not self.variance.distributions:
            return standard_variance_distributions()
        out = []
        for d in self.variance.distributions:
            d = dict(d)
            kind = d.pop("kind", None)
            if kind == "fixed":
                vals = _take(d, "variance.distributions", latency_ns=(float, 0.0))
                out.append(SyntheticLatencySpec.fixed(vals["latency_ns"]))
            elif kind == "bimodal":
                vals = _take(d, "variance.distributions", low_ns=(float, 0.0),
                             high_ns=(float, 0.0), p_low=(float, 0.8))
                out.append(SyntheticLatencySpec.bimodal(
                    vals["low_ns"], vals["high_ns"], vals["p_low"]))
            else:
                raise ConfigError(
                    f"variance distribution kind must be fixed or bimodal, "
                    f"got {kind!r}")
        return out

    def effective_config(self) -> dict:
        """The verbatim configuration echoed into report headers.

        Uses the scenario-file schema, so dumping it and reloading yields an
        identical Scenario."""
        core = asdict(self.variance.core)
        core["clock_ghz"] = core.pop("clock_hz") / 1e9
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "topology": self.topology,
            "interleave_granularity": self.interleave_granularity,
            "cxl_overhead_ns": self.cxl_overhead_ns,
            "warmup_fraction": self.warmup_fraction,
            "out_dir": self.out_dir,
            "report_format": self.report_format,
            "traffic": asdict(self.traffic),
            "sweep": {"utilizations": list(self.sweep.utilizations),
                      "request_count": self.sweep.request_count},
            "compare": asdict(self.compare),
            "asym": asdict(self.asym),
            "variance": {"instructions": self.variance.instructions,
                         "core": core,
                         "distributions": list(self.variance.distributions)},
            "timing": dict(self.timing_overrides),
            "link": dict(self.link_overrides),
            "power_cases": [asdict(c) for c in self.power_cases],
        }


DEFAULT_POWER_CASES = [
    PowerCase("ddr-baseline", ddr_channels=12, pcie_lanes=0, dimm_w=200.0,
              cpi=2.02),
    PowerCase("coaxial-4x", ddr_channels=48, pcie_lanes=384, dimm_w=551.0,
              cpi=1.33),
]


def _parse_traffic(raw: dict) -> TrafficConfig:
    vals = _take(
        raw, "traffic",
        kind=(str, "open-loop"),
        utilization=(float, 0.5),
        rate_gbps=(float, None),
        request_count=(int, 200_000),
        arrival=(str, "exponential"),
        batch_mean=(float, 8.0),
        read_fraction=(float, 0.67),
        address_pattern=(str, "uniform"),
        stride_bytes=(int, 64),
        on_us=(float, 10.0),
        off_us=(float, 10.0),
        on_rate_factor=(float, 2.0),
        address_space_gib=(float, 128.0),
        trace_path=(str, None),
    )
    if vals["kind"] not in ("open-loop", "trace"):
        raise ConfigError(f"traffic.kind must be open-loop or trace, "
                          f"got {vals['kind']!r}")
    return TrafficConfig(**vals)


def _parse_core(raw: dict) -> ClosedLoopCoreSpec:
    vals = _take(
        raw, "variance.core",
        cores=(int, 12), issue_width=(int, 4), rob_entries=(int, 256),
        mshrs=(int, 16), clock_ghz=(float, 2.0), miss_prob=(float, 0.04),
        write_prob=(float, 0.0), dependency_prob=(float, 0.0),
    )
    clock = vals.pop("clock_ghz") * 1e9
    return ClosedLoopCoreSpec(clock_hz=clock, **vals)


def scenario_from_dict(doc: dict, source: str = "<scenario>") -> Scenario:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    doc = dict(doc)
    traffic = _parse_traffic(dict(doc.pop("traffic", {}) or {}))
    sweep_raw = _take(dict(doc.pop("sweep", {}) or {}), "sweep",
                      utilizations=(list, None), request_count=(int, 120_000))
    sweep = SweepConfig(
        utilizations=tuple(float(u) for u in (sweep_raw["utilizations"]
                                              or SweepConfig().utilizations)),
        request_count=sweep_raw["request_count"])
    cmp_raw = _take(dict(doc.pop("compare", {}) or {}), "compare",
                    topo_a=(str, "ddr-baseline"), topo_b=(str, "coaxial-4x"),
                    arrival=(str, "batched"))
    asym_raw = _take(dict(doc.pop("asym", {}) or {}), "asym",
                     rate_gbps=(float, 57.6), read_fraction=(float, 0.67),
                     request_count=(int, 120_000))
    var_block = dict(doc.pop("variance", {}) or {})
    core = _parse_core(dict(var_block.pop("core", {}) or {}))
    var_raw = _take(var_block, "variance", instructions=(int, 400_000),
                    distributions=(list, []))
    power_raw = doc.pop("power_cases", None)
    if power_raw is None:
        power_cases = list(DEFAULT_POWER_CASES)
    else:
        power_cases = []
        for entry in power_raw:
            vals = _take(dict(entry), "power_cases", name=(str, "case"),
                         ddr_channels=(int, 0), pcie_lanes=(int, 0),
                         dimm_w=(float, 0.0), cpi=(float, 1.0))
            power_cases.append(PowerCase(**vals))

    top = _take(
        doc, source,
        experiment=(str, None),
        seed=(int, 42),
        topology=(lambda x: x, "ddr-baseline"),
        interleave_granularity=(int, 64),
        cxl_overhead_ns=(float, None),
        warmup_fraction=(float, 0.1),
        out_dir=(str, "out"),
        report_format=(str, "both"),
        timing=(dict, {}),
        link=(dict, {}),
    )
    if top["seed"] < 0:
        raise ConfigError(f"{source}: seed must be non-negative")
    if not 0.0 <= top["warmup_fraction"] < 1.0:
        raise ConfigError(f"{source}: warmup_fraction must lie in [0, 1)")
    if top["report_format"] not in ("csv", "json", "both"):
        raise ConfigError(f"{source}: report_format must be csv, json or both")
    topo = top["topology"]
    if isinstance(topo, str) and topo not in PRESETS:
        raise ConfigError(
            f"{source}: unknown topology preset {topo!r}; available: "
            f"{', '.join(PRESETS)}")
    timing_overrides = dict(top["timing"] or {})
    known_timing = {f.name for f in fields(DramTiming)}
    bad = set(timing_overrides) - known_timing
    if bad:
        raise ConfigError(f"{source}: unknown timing key(s): "
                          f"{', '.join(sorted(bad))}")
    from .cxl import CxlLinkConfig
    link_overrides = dict(top["link"] or {})
    known_link = {f.name for f in fields(CxlLinkConfig)}
    bad = set(link_overrides) - known_link
    if bad:
        raise ConfigError(f"{source}: unknown link key(s): "
                          f"{', '.join(sorted(bad))}")

    return Scenario(
        experiment=top["experiment"],
        seed=top["seed"],
        topology=topo,
        interleave_granularity=top["interleave_granularity"],
        cxl_overhead_ns=top["cxl_overhead_ns"],
        warmup_fraction=top["warmup_fraction"],
        out_dir=top["out_dir"],
        report_format=top["report_format"],
        traffic=traffic,
        sweep=sweep,
        compare=CompareConfig(**cmp_raw),
        asym=AsymConfig(**asym_raw),
        variance=VarianceConfig(instructions=var_raw["instructions"],
                                core=core,
                                distributions=var_raw["distributions"]),
        timing_overrides=timing_overrides,
        link_overrides=link_overrides,
        power_cases=power_cases,
    )


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file (YAML)."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed YAML: {exc}") from None
    return scenario_from_dict(doc, source=path)
