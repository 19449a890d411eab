"""
report.py — Report writers.

Reports are deterministic: keys are sorted, there are no timestamps, and
records arrive already ordered by grid index.
"""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Sequence
from io import StringIO
from pathlib import Path
from typing import Any

import numpy as np
from ruamel.yaml import YAML

from .qseries import LaurentSeries

SERIES_COLUMNS = ("power", "re", "im", "trusted")


def _plain(obj: Any) -> Any:
    """Convert numpy scalars and tuples to plain Python for serialisation."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return _plain(obj.item())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render_records(records: Sequence[dict], fmt: str = "json") -> str:
    data = _plain(list(records))
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    yaml = YAML(typ="safe")
    yaml.default_flow_style = False
    stream = StringIO()
    yaml.dump(data, stream)
    return stream.getvalue()


def summary_table(records: Sequence[dict]) -> str:
    """Plain-text table: one row per record plus a totals line."""
    header = f"{'index':>5}  {'state':>5}  {'check':<8}  {'status':<7}  max_residual"
    lines = [header, "-" * len(header)]
    counts: dict[str, int] = {}
    for rec in records:
        status = rec.get("status", "?")
        counts[status] = counts.get(status, 0) + 1
        residual = rec.get("max_residual")
        shown = f"{residual:.3e}" if isinstance(residual, float) else "-"
        state = rec.get("state")
        lines.append(
            f"{rec.get('index', '-'):>5}  {'-' if state is None else state:>5}  "
            f"{rec.get('check', '-'):<8}  {status:<7}  {shown}"
        )
    totals = ", ".join(f"{k}: {counts[k]}" for k in sorted(counts))
    lines.append("")
    lines.append(f"{len(records)} records ({totals})")
    return "\n".join(lines) + "\n"


def write_report(records: Sequence[dict], out_dir: Path, fmt: str = "json") -> Path:
    """Write report.<fmt> and summary.txt into out_dir; return the report path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"report.{fmt}"
    path.write_text(render_records(records, fmt), encoding="utf-8")
    (out_dir / "summary.txt").write_text(summary_table(records), encoding="utf-8")
    logging.info("Wrote %d records to %s", len(records), path)
    return path


def series_rows(series: LaurentSeries) -> list[tuple[int, float, float, bool]]:
    mask = series.trust_mask
    return [
        (int(k), float(c.real), float(c.imag), bool(t))
        for k, c, t in zip(series.powers, series.coeffs, mask, strict=True)
    ]


def write_series_csv(series: LaurentSeries, path: Path) -> Path:
    """Coefficient table with header power,re,im,trusted."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SERIES_COLUMNS)
        for power, re, im, trusted in series_rows(series):
            writer.writerow([power, repr(re), repr(im), "true" if trusted else "false"])
    logging.info("Wrote %d coefficients to %s", series.coeffs.size, path)
    return path
