#!/usr/bin/env python3
"""Load-latency curve: average and p90 memory access latency against
bandwidth utilization, from a sweep-load report CSV."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import SchemaError, fail, load_report_csv, save_figure

COLUMNS = ("util", "avg_ns", "p50", "p90", "p99")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="sweep_load.csv from the simulator")
    ap.add_argument("--out", default="load_latency.png")
    ap.add_argument("--title", default="Loaded memory access latency")
    args = ap.parse_args()
    try:
        rows = load_report_csv(args.csv, COLUMNS)
    except SchemaError as exc:
        fail(str(exc))
    rows.sort(key=lambda r: r["util"])
    util = [r["util"] * 100 for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(util, [r["avg_ns"] for r in rows], marker="o", label="average")
    ax.plot(util, [r["p90"] for r in rows], marker="s", label="p90")
    ax.set_xlabel("bandwidth utilization (%)")
    ax.set_ylabel("memory access latency (ns)")
    ax.set_title(args.title)
    ax.grid(alpha=0.3)
    ax.legend()
    save_figure(fig, args.out)


if __name__ == "__main__":
    main()
