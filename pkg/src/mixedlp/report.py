"""Probe reports and their JSON/CSV emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np


@dataclass
class ProbeReport:
    """Rows of probe outcomes.

    Each row is a flat mapping of scalars and carries a ``pass`` entry that is
    ``True``, ``False`` or ``None`` (informational row, not judged).
    """

    name: str
    parameters: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)

    def add(self, passed: bool | None = None, **values) -> dict[str, Any]:
        row = dict(values)
        row["pass"] = None if passed is None else bool(passed)
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        if self.summary.get("error"):
            return False
        return all(r["pass"] is not False for r in self.rows)

    @property
    def failures(self) -> list[dict[str, Any]]:
        return [r for r in self.rows if r["pass"] is False]

    def to_dict(self) -> dict[str, Any]:
        return {
            "probe": self.name,
            "parameters": _plain(self.parameters),
            "summary": _plain(dict(self.summary, passed=self.passed)),
            "rows": _plain(self.rows),
        }


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _csv_text(report: ProbeReport, header: Mapping[str, Any]) -> str:
    buf = io.StringIO()
    for key, value in _plain(header).items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True, ensure_ascii=True)}\n")
    rows = _plain(report.rows)
    if rows:
        columns = []
        for row in rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row.get(k)) for k in columns})
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return v.encode("ascii", "backslashreplace").decode("ascii")
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True, ensure_ascii=True)
    return v


def emit_report(report: ProbeReport, json_path, csv_path, header: Mapping[str, Any] | None = None) -> None:
    """Write the full report as JSON and a row summary as CSV, both pure ASCII."""
    header = dict(header or {})
    payload = {"header": _plain(header), **report.to_dict()}
    text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n"
    Path(json_path).write_text(text, encoding="ascii")
    Path(csv_path).write_text(_csv_text(report, dict(header, probe=report.name)), encoding="ascii")
