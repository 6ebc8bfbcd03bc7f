"""Command-line runner: parses a scenario, executes one experiment, writes
CSV/JSON reports.

Exit status: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__, TOOL_NAME
from . import experiments, reports
from .errors import ConfigError, MemqsimError
from .scenario import Scenario, load_scenario, scenario_from_dict

COLUMNS = {
    "run": ["topology", "requests", "avg_ns", "p50", "p90", "p99", "stdev_ns",
            "utilization", "mc_queue_ns", "dram_service_ns", "link_port_ns",
            "link_wire_queue_ns", "total_ns"],
    "sweep-load": ["util", "avg_ns", "p50", "p90", "p99"],
    "compare": ["topology", "avg_ns", "p50", "p90", "p99", "stdev_ns",
                "utilization", "mc_queue_ns", "dram_service_ns",
                "link_port_ns", "link_wire_queue_ns", "total_ns"],
    "variance": ["backend", "stdev_ns", "mean_ns", "ipc", "relative_ipc",
                 "reference_relative"],
    "asym-compare": ["topology", "avg_read_ns", "p50", "p90", "p99",
                     "utilization", "tx_util", "rx_util", "read_gbps"],
    "pins": ["name", "pins", "bandwidth_gbps", "directions_counted",
             "gbps_per_pin"],
    "power": ["config", "package_w", "ddr_ctrl_phy_w", "cxl_lane_w", "dimm_w",
              "total_w", "cpi", "edp"],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Deterministic discrete-event simulator of server memory "
                    "systems: DDR-direct baseline vs CXL-attached topologies.")
    parser.add_argument("--version", action="version",
                        version=f"{TOOL_NAME} {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="FILE",
                        help="scenario file (YAML); flags override its fields")
    common.add_argument("--seed", type=int, help="PRNG seed")
    common.add_argument("--out-dir", help="report output directory")
    common.add_argument("--format", choices=["csv", "json", "both"],
                        dest="report_format", help="report format")
    common.add_argument("--cxl-overhead-ns", type=float, metavar="N",
                        help="rescale CXL port delays so an uncontended read "
                             "round trip adds N ns")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common],
                   help="one simulation of the scenario topology and traffic")
    p = sub.add_parser("sweep-load", parents=[common],
                       help="load-latency curve over utilization points")
    p.add_argument("--utilizations", metavar="U1,U2,...",
                   help="comma-separated utilization fractions in (0,1)")
    sub.add_parser("variance", parents=[common],
                   help="equal-mean latency-distribution experiment")
    p = sub.add_parser("compare", parents=[common],
                       help="identical traffic through two topologies")
    p.add_argument("topo_a", nargs="?", help="first topology preset")
    p.add_argument("topo_b", nargs="?", help="second topology preset")
    sub.add_parser("asym-compare", parents=[common],
                   help="symmetric vs asymmetric link provisioning")
    sub.add_parser("pins", parents=[common],
                   help="bandwidth-per-pin calculator")
    sub.add_parser("power", parents=[common],
                   help="system power and energy-delay product")
    return parser


def _print_table(columns, rows) -> None:
    cells = [[reports.format_value(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c)
              for i, c in enumerate(columns)]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for row in cells:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))


def _execute(args) -> int:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        scenario = scenario_from_dict({}, source="<defaults>")
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        scenario.seed = args.seed
    if args.out_dir is not None:
        scenario.out_dir = args.out_dir
    if args.report_format is not None:
        scenario.report_format = args.report_format
    if args.cxl_overhead_ns is not None:
        scenario.cxl_overhead_ns = args.cxl_overhead_ns
    kind = args.command
    scenario.experiment = kind

    if kind == "run":
        rows, summary, extras = experiments.run_single(scenario)
    elif kind == "sweep-load":
        utils = None
        if getattr(args, "utilizations", None):
            try:
                utils = [float(u) for u in args.utilizations.split(",") if u]
            except ValueError:
                raise ConfigError(
                    f"--utilizations: expected comma-separated floats, got "
                    f"{args.utilizations!r}") from None
        rows, summary, extras = experiments.sweep_load(scenario, utils)
    elif kind == "variance":
        rows, summary, extras = experiments.variance(scenario)
    elif kind == "compare":
        rows, summary, extras = experiments.compare(
            scenario, getattr(args, "topo_a", None),
            getattr(args, "topo_b", None))
    elif kind == "asym-compare":
        rows, summary, extras = experiments.asym_compare(scenario)
    elif kind == "pins":
        rows, summary, extras = experiments.pins(scenario)
    elif kind == "power":
        rows, summary, extras = experiments.power(scenario)
    else:  # pragma: no cover - argparse enforces choices
        raise ConfigError(f"unknown command {kind!r}")

    columns = COLUMNS[kind]
    _print_table(columns, rows)

    reports.ensure_out_dir(scenario.out_dir)
    stem = kind.replace("-", "_")
    if scenario.report_format in ("csv", "both"):
        reports.write_csv(os.path.join(scenario.out_dir, f"{stem}.csv"),
                          kind, scenario, columns, rows)
        for name, samples in extras.items():
            reports.write_cdf_csv(
                os.path.join(scenario.out_dir, f"{name}.csv"),
                kind, scenario, samples)
    if scenario.report_format in ("json", "both"):
        reports.write_json(os.path.join(scenario.out_dir, f"{stem}.json"),
                           kind, scenario, summary)
    print(f"reports written to {scenario.out_dir}/", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _execute(args)
    except ConfigError as exc:
        print(f"{TOOL_NAME}: configuration error: {exc}", file=sys.stderr)
        return 2
    except MemqsimError as exc:
        print(f"{TOOL_NAME}: runtime error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{TOOL_NAME}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
