#!/usr/bin/env python3
"""Produce the standard report set consumed by the figure scripts: the
load-latency sweep, the baseline-vs-CXL comparison (with CDFs), and the
latency-variance experiment.

Usage: python scripts/generate_reports.py [--out-dir out] [--seed 42] [--fast]
"""

import argparse
import sys

from memqsim.cli import main as memqsim


def run(args: list[str]) -> None:
    rc = memqsim(args)
    if rc != 0:
        sys.exit(rc)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--seed", default="42")
    ap.add_argument("--fast", action="store_true",
                    help="small request counts (smoke test quality)")
    args = ap.parse_args()
    common = ["--out-dir", args.out_dir, "--seed", args.seed]
    if args.fast:
        import tempfile
        import yaml
        scenario = tempfile.NamedTemporaryFile(
            "w", suffix=".yaml", delete=False)
        yaml.safe_dump({
            "traffic": {"request_count": 10_000},
            "sweep": {"utilizations": [0.05, 0.2, 0.4, 0.5, 0.6],
                      "request_count": 10_000},
            "variance": {"instructions": 50_000, "core": {"cores": 2}},
        }, scenario)
        scenario.close()
        common += ["--scenario", scenario.name]
    run(["sweep-load", *common])
    run(["compare", "ddr-baseline", "coaxial-4x", *common])
    run(["variance", *common])


if __name__ == "__main__":
    main()
