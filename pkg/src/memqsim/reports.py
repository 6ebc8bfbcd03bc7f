"""Report writers: deterministic CSV and JSON files.

Every report embeds the tool version, the effective configuration, the seed,
and the PRNG algorithm name; nothing time- or host-dependent is written, so
identical (scenario, seed, flags) produce byte-identical files.
"""

from __future__ import annotations

import json
import os

from . import __version__, TOOL_NAME
from .rng import ALGORITHM


def _meta_lines(experiment: str, scenario) -> list[str]:
    cfg = json.dumps(scenario.effective_config(), sort_keys=True,
                     separators=(",", ":"))
    return [
        f"# {TOOL_NAME} {__version__} experiment={experiment} "
        f"seed={scenario.seed} prng={ALGORITHM}",
        f"# config: {cfg}",
    ]


def format_value(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_csv(path: str, experiment: str, scenario, columns, rows) -> None:
    lines = _meta_lines(experiment, scenario)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(row[c]) for c in columns))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, experiment: str, scenario, summary: dict) -> None:
    doc = {
        "tool": TOOL_NAME,
        "version": __version__,
        "experiment": experiment,
        "seed": scenario.seed,
        "prng": ALGORITHM,
        "config": scenario.effective_config(),
        "results": summary,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_cdf_csv(path: str, experiment: str, scenario, samples_ns) -> None:
    import numpy as np
    arr = np.sort(np.asarray(samples_ns, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("cannot export a CDF of an empty sample")
    values, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts) / arr.size
    lines = _meta_lines(experiment, scenario)
    lines.append("latency_ns,cum_fraction")
    for v, c in zip(values, cum):
        lines.append(f"{v:.6g},{c:.9f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def ensure_out_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
