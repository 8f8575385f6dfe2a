"""Grid parsing and the flat-file formats used by the command-line tools.

CSV files start with ``#``-prefixed metadata lines (one JSON object each),
followed by a header row and data rows.  Floats are written with 17
significant digits so a file round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from qecregimes.errors import DomainError, SchemaError

SCHEMAS = {
    "curve": ("L", "p", "pfail"),
    "curve_err": ("L", "p", "pfail", "stderr"),
    "shots": ("L", "p", "shots", "failures", "pfail_hat", "ci_low", "ci_high", "ties", "timeouts", "seed"),
    "gap": ("L", "p", "delta_e", "count"),
}


def parse_grid(spec: str) -> list[float]:
    """Parse ``start:stop:step`` into an inclusive grid.

    The stop value is included when it lies within half a step of a grid
    point.  Points are computed as ``start + i*step`` and rounded to 12
    decimals to avoid accumulated drift.

    Raises:
        DomainError: For a malformed spec, a nonpositive step or an empty grid.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError as exc:
        raise DomainError(f"grid values must be numbers: {spec!r}") from exc
    if not step > 0:
        raise DomainError("grid step must be positive")
    if stop < start:
        raise DomainError(f"empty grid {spec!r}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def fmt(v) -> str:
    """Format a value for CSV: integers verbatim, floats at 17 digits."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(columns, rows, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    if metadata:
        for key in sorted(metadata):
            buf.write(f"# {key}: {json.dumps(metadata[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(columns, rows, metadata: dict | None = None) -> str:
    def clean(v):
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (np.floating,)):
            return float(v)
        if isinstance(v, np.bool_):
            return bool(v)
        return v

    obj = {"metadata": metadata or {}, "rows": [dict(zip(columns, map(clean, r))) for r in rows]}
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_table(path, columns, rows, metadata: dict | None = None, fmt_: str = "csv") -> str:
    """Write a table as CSV or JSON; ``path`` of ``None`` or ``-`` returns text only."""
    text = render_csv(columns, rows, metadata) if fmt_ == "csv" else render_json(columns, rows, metadata)
    if path not in (None, "-"):
        Path(path).write_text(text)
    return text


def write_json(path, obj) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"
    if path not in (None, "-"):
        Path(path).write_text(text)
    return text


def _json_default(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v)}")


def read_table(path) -> tuple[list[str], list[dict], dict]:
    """Read a CSV or JSON table written by :func:`write_table`.

    Returns:
        ``(columns, rows, metadata)``; values are floats.

    Raises:
        SchemaError: On non-numeric cells or ragged rows, naming the row.
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
            rows = obj["rows"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SchemaError(f"{path}: not a table JSON file") from exc
        cols = list(rows[0].keys()) if rows else []
        out = []
        for i, r in enumerate(rows):
            try:
                out.append({k: float(r[k]) for k in cols})
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}: malformed row {i + 1}: {r!r}") from exc
        return cols, out, obj.get("metadata", {})
    meta = {}
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            try:
                meta[key.strip()] = json.loads(val)
            except json.JSONDecodeError:
                meta[key.strip()] = val.strip()
        elif line.strip():
            lines.append(line)
    if not lines:
        raise SchemaError(f"{path}: no header row")
    reader = csv.reader(lines)
    cols = [c.strip() for c in next(reader)]
    out = []
    for i, r in enumerate(reader, start=1):
        if len(r) != len(cols):
            raise SchemaError(f"{path}: row {i} has {len(r)} fields, expected {len(cols)}: {r!r}")
        try:
            out.append({c: float(v) for c, v in zip(cols, r)})
        except ValueError as exc:
            raise SchemaError(f"{path}: row {i} is not numeric: {r!r}") from exc
    return cols, out, meta


def require_columns(cols, needed, path) -> None:
    missing = [c for c in needed if c not in cols]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
