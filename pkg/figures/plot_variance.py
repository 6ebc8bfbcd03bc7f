#!/usr/bin/env python3
"""Relative performance under equal-mean latency distributions of growing
spread, from a variance report CSV; published reference anchors drawn as
markers when present."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from common import SchemaError, fail, load_report_csv, save_figure

COLUMNS = ("backend", "stdev_ns", "relative_ipc")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="variance.csv from the simulator")
    ap.add_argument("--out", default="variance.png")
    ap.add_argument("--title",
                    default="Performance vs latency spread (equal means)")
    args = ap.parse_args()
    try:
        rows = load_report_csv(args.csv, COLUMNS)
    except SchemaError as exc:
        fail(str(exc))
    fig, ax = plt.subplots(figsize=(1.4 + 1.1 * len(rows), 3.2))
    xs = range(len(rows))
    ax.bar(xs, [r["relative_ipc"] for r in rows], width=0.55,
           color="tab:purple", label="simulated")
    refs = [(i, r["reference_relative"]) for i, r in enumerate(rows)
            if isinstance(r["reference_relative"], float)]
    if refs:
        ax.plot([i for i, _ in refs], [v for _, v in refs], "k_",
                markersize=18, label="reference")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([f"{r['backend']}\nstdev {r['stdev_ns']:g} ns"
                        for r in rows], fontsize=7)
    ax.set_ylabel("IPC relative to fixed latency")
    ax.set_ylim(0, 1.05)
    ax.grid(axis="y", alpha=0.3)
    ax.set_title(args.title)
    ax.legend(fontsize=8)
    save_figure(fig, args.out)


if __name__ == "__main__":
    main()
