"""Shared helpers for the figure scripts: loading the simulator's CSV
reports (comment-prefixed headers) and validating their schemas.

The scripts are read-only over their inputs and idempotent; a schema
mismatch fails fast with the offending columns named.
"""

from __future__ import annotations

import csv
import os
import sys


class SchemaError(Exception):
    pass


def load_report_csv(path: str, required_columns: tuple) -> list[dict]:
    """Read one report CSV, skipping '#' metadata lines, and check that all
    required columns are present."""
    if not os.path.exists(path):
        raise SchemaError(f"{path}: no such file")
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    missing = [c for c in required_columns if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}; found "
            f"{', '.join(reader.fieldnames or ['<none>'])}")
    out = []
    for row in reader:
        parsed = {}
        for key, value in row.items():
            try:
                parsed[key] = float(value)
            except (TypeError, ValueError):
                parsed[key] = value
        out.append(parsed)
    if not out:
        raise SchemaError(f"{path}: no data rows")
    return out


def save_figure(fig, out_path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    print(f"wrote {out_path}")


def fail(message: str) -> "NoReturn":
    print(f"error: {message}", file=sys.stderr)
    sys.exit(2)
