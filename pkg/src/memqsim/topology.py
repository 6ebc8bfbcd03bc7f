"""System assembly: traffic sources feed optional CXL links that front DDR
channels, with line-granularity interleaving across all channels.

Presets are scaled to the 12-core simulated slice of the full server
configurations: the DDR baseline keeps one direct channel; the CXL variants
trade the same processor pins for 2x / 4x the channels behind serial links,
and the asymmetric variant fronts two DDR channels per link.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cxl import LINK_PRESETS, CxlLinkConfig, X8, X8_ASYM
from .dram import DramTiming
from .errors import ConfigError


@dataclass(frozen=True)
class MemoryPath:
    """One processor-attached memory path: an optional link and its channels."""

    link: CxlLinkConfig | None
    channels: tuple[DramTiming, ...]


@dataclass(frozen=True)
class Topology:
    name: str
    paths: tuple[MemoryPath, ...]
    cores: int = 12
    interleave_granularity: int = 64
    # halved-LLC presets see proportionally more misses; applies only to
    # closed-loop traffic specs, never to open-loop rates
    miss_prob_multiplier: float = 1.0

    def __post_init__(self):
        g = self.interleave_granularity
        if g < 64 or g & (g - 1):
            raise ConfigError(
                "interleave granularity must be a power of two >= 64")

    @property
    def channel_owners(self) -> tuple[tuple[int, int], ...]:
        """Global channel index -> (path index, channel-in-path index)."""
        owners = []
        for p, path in enumerate(self.paths):
            for c in range(len(path.channels)):
                owners.append((p, c))
        return tuple(owners)

    @property
    def n_channels(self) -> int:
        return sum(len(p.channels) for p in self.paths)

    @property
    def n_links(self) -> int:
        return sum(1 for p in self.paths if p.link is not None)

    @property
    def aggregate_peak_bytes_per_s(self) -> float:
        return sum(ch.peak_bytes_per_s for p in self.paths for ch in p.channels)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "cores": self.cores,
            "paths": len(self.paths),
            "links": self.n_links,
            "channels": self.n_channels,
            "interleave_granularity": self.interleave_granularity,
            "aggregate_peak_gbps": self.aggregate_peak_bytes_per_s / 1e9,
            "miss_prob_multiplier": self.miss_prob_multiplier,
        }


def map_address(address: int, topology: Topology) -> tuple[int, int]:
    """Round-robin channel interleave at the configured granularity.

    Pure function of (address, topology): the address bits directly above the
    granularity offset select the channel.
    """
    owners = topology.channel_owners
    idx = (address // topology.interleave_granularity) % len(owners)
    return owners[idx]


def _ddr(**overrides) -> DramTiming:
    return DramTiming(**overrides)


def _preset(name: str, timing_overrides: dict | None = None) -> Topology:
    overrides = timing_overrides or {}

    def ch() -> DramTiming:
        return _ddr(**overrides)

    if name == "ddr-baseline":
        return Topology(name, (MemoryPath(None, (ch(),)),))
    if name == "coaxial-2x":
        return Topology(name, tuple(MemoryPath(X8, (ch(),)) for _ in range(2)))
    if name == "coaxial-4x":
        return Topology(name, tuple(MemoryPath(X8, (ch(),)) for _ in range(4)),
                        miss_prob_multiplier=1.3)
    if name == "coaxial-5x":
        return Topology(name, tuple(MemoryPath(X8, (ch(),)) for _ in range(5)),
                        miss_prob_multiplier=1.3)
    if name == "coaxial-asym":
        return Topology(name,
                        tuple(MemoryPath(X8_ASYM, (ch(), ch())) for _ in range(4)),
                        miss_prob_multiplier=1.3)
    raise ConfigError(
        f"unknown topology preset {name!r}; available: {', '.join(PRESETS)}")


PRESETS = ("ddr-baseline", "coaxial-2x", "coaxial-4x", "coaxial-5x", "coaxial-asym")


def build(spec, timing_overrides: dict | None = None,
          link_overrides: dict | None = None,
          cxl_round_trip_ns: float | None = None) -> Topology:
    """Build a Topology from a preset name or a custom path description.

    Custom specs are a list of path dicts: ``{"link": "x8"|"x8-asym"|null,
    "channels": <count>}``; link/timing overrides apply uniformly.
    """
    from .cxl import with_round_trip_overhead

    if isinstance(spec, str):
        topo = _preset(spec, timing_overrides)
    else:
        paths = []
        for entry in spec:
            link_name = entry.get("link")
            if link_name is None:
                link = None
            elif link_name in LINK_PRESETS:
                link = LINK_PRESETS[link_name]
            else:
                raise ConfigError(
                    f"unknown link preset {link_name!r}; available: "
                    f"{', '.join(LINK_PRESETS)}")
            n = int(entry.get("channels", 1))
            if n < 1:
                raise ConfigError("each path needs at least one channel")
            channels = tuple(_ddr(**(timing_overrides or {})) for _ in range(n))
            paths.append(MemoryPath(link, channels))
        topo = Topology("custom", tuple(paths))

    if link_overrides or cxl_round_trip_ns is not None:
        new_paths = []
        for path in topo.paths:
            link = path.link
            if link is not None:
                if link_overrides:
                    link = replace(link, **link_overrides)
                if cxl_round_trip_ns is not None:
                    link = with_round_trip_overhead(link, cxl_round_trip_ns)
            new_paths.append(MemoryPath(link, path.channels))
        topo = replace(topo, paths=tuple(new_paths))
    return topo
