"""Delimited output with lossless rationals.

Exact values travel as a pair of columns: the reduced "num/den" string (or a
plain integer) and a 6-decimal rendering for human scans.  Column order is
fixed by the caller and the timestamp, when present, is always emitted last
so byte-comparison of reruns can slice it off.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from fractions import Fraction

from ._version import __version__
from .montecarlo import RNG_FAMILY

FLOAT_DECIMALS = 6


def format_exact(value: Fraction | int) -> str:
    return str(Fraction(value))


def format_decimal(value) -> str:
    return f"{float(value):.{FLOAT_DECIMALS}f}"


def parse_exact(text: str) -> Fraction:
    """Inverse of format_exact; lossless for every rational."""
    return Fraction(text)


def exact_cells(name: str, value: Fraction | int) -> list[tuple[str, str]]:
    """The dual num/den + decimal encoding as two adjacent columns."""
    return [(name, format_exact(value)), (f"{name}_decimal", format_decimal(value))]


def _encode_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_exact(value)
    if isinstance(value, float):
        return format_decimal(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _encode_json(value):
    if isinstance(value, Fraction):
        return format_exact(value)
    if isinstance(value, tuple):
        return [_encode_json(v) for v in value]
    if isinstance(value, list):
        return [_encode_json(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode_json(v) for k, v in value.items()}
    return value


def _order_columns(columns: list[str]) -> list[str]:
    if "timestamp" in columns:
        return [c for c in columns if c != "timestamp"] + ["timestamp"]
    return list(columns)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    if not rows:
        raise ValueError("no rows to emit")
    cols = _order_columns(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_encode_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def render_json_lines(rows: list[dict], columns: list[str]) -> str:
    if not rows:
        raise ValueError("no rows to emit")
    cols = _order_columns(columns)
    out = []
    for row in rows:
        ordered = {c: _encode_json(row.get(c)) for c in cols if c in row}
        for key in row:
            if key not in ordered:
                ordered[key] = _encode_json(row[key])
        out.append(json.dumps(ordered, separators=(",", ":")))
    return "\n".join(out) + "\n"


def emit_table(rows: list[dict], columns: list[str], fmt: str = "csv", path: str | None = None) -> str:
    """Render rows and optionally write them; returns the rendered text."""
    if fmt == "csv":
        text = render_csv(rows, columns)
    elif fmt == "json":
        text = render_json_lines(rows, columns)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def provenance(with_timestamp: bool = True) -> dict:
    out = {"version": __version__, "rng": RNG_FAMILY}
    if with_timestamp:
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    return out
