"""Deterministic CSV/JSON emission with provenance headers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from solitongeom import __version__

TOOL = "solitongeom"
SCHEMA = 1


def fmt(value):
    """Round-trip text for one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def jsonable(value):
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


def provenance_lines(config):
    lines = [f"tool={TOOL} version={__version__} schema={SCHEMA}"]
    for key, value in sorted(config.items()):
        lines.append(f"config.{key}={fmt(value) if not isinstance(value, (list, tuple)) else ','.join(fmt(v) for v in value)}")
    return lines


def write_csv(path, rows, config, columns=None):
    """Write ``rows`` (dicts) with a ``#`` provenance block and a header row."""
    rows = list(rows)
    if columns is None:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
    path = Path(path)
    with path.open("w", newline="") as fh:
        for line in provenance_lines(config):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])
    return path


def write_json(path, config, reports):
    payload = {"tool": TOOL, "version": __version__, "schema": SCHEMA,
               "config": jsonable(config), "reports": jsonable(reports)}
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path
