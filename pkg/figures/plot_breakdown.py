#!/usr/bin/env python3
"""Latency-breakdown stacks per topology: controller queue, DRAM service,
and link components, from a compare report CSV.

Verifies internally that each topology's stack sums to its total column
before plotting; a mismatch aborts with a nonzero exit."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import SchemaError, fail, load_report_csv, save_figure

STACK = ("mc_queue_ns", "dram_service_ns", "link_port_ns", "link_wire_queue_ns")
LABELS = ("controller queue", "DRAM service", "link ports", "link wire+queue")
COLUMNS = ("topology",) + STACK + ("total_ns",)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="compare.csv from the simulator")
    ap.add_argument("--out", default="breakdown.png")
    ap.add_argument("--title", default="Memory access latency breakdown")
    ap.add_argument("--tolerance", type=float, default=1e-3,
                    help="stack-sum check tolerance in ns")
    args = ap.parse_args()
    try:
        rows = load_report_csv(args.csv, COLUMNS)
    except SchemaError as exc:
        fail(str(exc))
    for row in rows:
        stack_sum = sum(row[c] for c in STACK)
        if abs(stack_sum - row["total_ns"]) > args.tolerance:
            fail(f"{row['topology']}: stack sums to {stack_sum:.4f} ns but "
                 f"total is {row['total_ns']:.4f} ns")
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(rows), 3.4))
    xs = range(len(rows))
    bottom = [0.0] * len(rows)
    for comp, label in zip(STACK, LABELS):
        vals = [r[comp] for r in rows]
        ax.bar(xs, vals, bottom=bottom, label=label, width=0.55)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r["topology"] for r in rows], rotation=15)
    ax.set_ylabel("average latency (ns)")
    ax.set_title(args.title)
    ax.legend(fontsize=8)
    save_figure(fig, args.out)


if __name__ == "__main__":
    main()
