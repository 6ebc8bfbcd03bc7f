#!/usr/bin/env python3
"""Bandwidth-utilization bars per topology, from a compare report CSV."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import SchemaError, fail, load_report_csv, save_figure

COLUMNS = ("topology", "utilization")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="compare.csv from the simulator")
    ap.add_argument("--out", default="utilization.png")
    ap.add_argument("--title", default="Memory bandwidth utilization")
    args = ap.parse_args()
    try:
        rows = load_report_csv(args.csv, COLUMNS)
    except SchemaError as exc:
        fail(str(exc))
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(rows), 3.0))
    xs = range(len(rows))
    ax.bar(xs, [r["utilization"] * 100 for r in rows], width=0.5,
           color="tab:blue")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r["topology"] for r in rows], rotation=15)
    ax.set_ylabel("utilization (%)")
    ax.set_ylim(0, 100)
    ax.set_title(args.title)
    ax.grid(axis="y", alpha=0.3)
    save_figure(fig, args.out)


if __name__ == "__main__":
    main()
