#!/usr/bin/env python3
"""Overlaid latency CDFs from one or more CDF report CSVs (step plot)."""

import argparse
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import SchemaError, fail, load_report_csv, save_figure

COLUMNS = ("latency_ns", "cum_fraction")


def label_for(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem.replace("cdf_", "").replace("cdf", "latency")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csvs", nargs="+", help="cdf CSVs from the simulator")
    ap.add_argument("--out", default="cdf.png")
    ap.add_argument("--title", default="Memory access time CDF")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for path in args.csvs:
        try:
            rows = load_report_csv(path, COLUMNS)
        except SchemaError as exc:
            fail(str(exc))
        ax.step([r["latency_ns"] for r in rows],
                [r["cum_fraction"] for r in rows],
                where="post", label=label_for(path))
    ax.set_xlabel("memory access latency (ns)")
    ax.set_ylabel("cumulative fraction")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.set_title(args.title)
    ax.legend(fontsize=8)
    save_figure(fig, args.out)


if __name__ == "__main__":
    main()
