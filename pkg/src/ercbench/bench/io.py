"""CSV / JSON export of run records."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from ercbench.records import RECORD_COLUMNS, RunRecord

FORMATS = ("csv", "json")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(RECORD_COLUMNS)
    for rec in records:
        d = rec.to_dict(with_status=False)
        w.writerow([_cell(d[c]) for c in RECORD_COLUMNS])
    return buf.getvalue()


def records_to_json(records: Sequence[RunRecord]) -> str:
    return json.dumps([r.to_dict(with_status=False) for r in records], indent=2) + "\n"


def export_records(records: Sequence[RunRecord], fmt: str, path) -> Path:
    """Write records as CSV (RFC 4180) or a JSON array; undefined R² is empty / null."""
    if not records:
        raise ValueError("no records to export")
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    text = records_to_csv(records) if fmt == "csv" else records_to_json(records)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _from_row(row: dict) -> RunRecord:
    d = dict(row)
    d["r2"] = None if d.get("r2") in ("", None) else float(d["r2"])
    return RunRecord.from_dict(d)


def load_records(path) -> list[RunRecord]:
    """Read back a CSV or JSON export (format from the file suffix)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return [_from_row(d) for d in json.loads(text)]
    return [_from_row(row) for row in csv.DictReader(io.StringIO(text, newline=""))]
