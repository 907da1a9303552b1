"""Deterministic CSV/JSON output with a one-line provenance header.

Tables start with ``# dwell-version <v>, key=value, ...``; JSON documents
carry the same line under the ``"provenance"`` key so they stay valid JSON.
Floats are written with ``repr`` so re-reading and re-writing a file is
byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__

_PREFIX = "# dwell-version "


def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf")
    if x is None:
        return ""
    return str(x)


def provenance_line(meta: Mapping[str, Any]) -> str:
    parts = [f"{_PREFIX}{meta.get('dwell-version', __version__)}"]
    for key in sorted(k for k in meta if k != "dwell-version"):
        val = meta[key]
        if isinstance(val, (list, tuple, np.ndarray)):
            val = ";".join(_fmt(v) for v in val)
        else:
            val = _fmt(val)
        parts.append(f"{key}={val}")
    return ", ".join(parts)


def parse_provenance(line: str) -> dict[str, str]:
    line = line.strip()
    if not line.startswith(_PREFIX):
        raise ValueError("missing provenance header")
    head, *rest = line[len(_PREFIX):].split(", ")
    meta = {"dwell-version": head}
    for item in rest:
        key, _, val = item.partition("=")
        meta[key] = val
    return meta


@dataclass(eq=False)
class Table:
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        vals = [r[i] for r in self.rows]
        try:
            return np.array(vals, dtype=float)
        except (TypeError, ValueError):
            return np.array(vals, dtype=object)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(provenance_line(self.meta) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def table_from_columns(columns: Mapping[str, Sequence], meta: Mapping[str, Any]) -> Table:
    names = list(columns)
    length = {len(v) for v in columns.values()}
    if len(length) > 1:
        raise ValueError("columns have different lengths")
    rows = [list(r) for r in zip(*(columns[k] for k in names))]
    return Table(names, rows, dict(meta))


def _convert(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path: str | Path) -> Table:
    text = Path(path).read_text()
    first, _, body = text.partition("\n")
    meta = parse_provenance(first)
    reader = csv.reader(io.StringIO(body))
    columns = next(reader)
    rows = [[_convert(c) for c in r] for r in reader if r]
    return Table(columns, rows, meta)


def write_csv(path: str | Path, table: Table) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv())
    return path


def _jsonable(x):
    if isinstance(x, Mapping):
        return {str(k.value if hasattr(k, "value") else k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "value"):
        return x.value
    return x


def dump_json(doc: Mapping[str, Any], meta: Mapping[str, Any]) -> str:
    body = {"provenance": provenance_line(meta)}
    body.update(_jsonable(doc))
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, doc: Mapping[str, Any], meta: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(doc, meta))
    return path


def read_json(path: str | Path) -> tuple[dict, dict]:
    """(meta, document without the provenance key)."""
    doc = json.loads(Path(path).read_text())
    meta = parse_provenance(doc.pop("provenance"))
    return meta, doc
