"""CSV and JSON writers for sweeps, spectra and cooling runs."""
from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence


def _cell(value):
    if hasattr(value, "item"):
        value = value.item()
    return repr(value) if isinstance(value, float) else value


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} cells, header has {len(header)}")
            writer.writerow([_cell(v) for v in row])


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_table(path: str | Path, header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> None:
    """Write rows as CSV or as a JSON object of columns."""
    if fmt == "csv":
        write_csv(path, header, rows)
        return
    rows = [list(r) for r in rows]
    payload = {name: [_jsonable(r[i]) for r in rows] for i, name in enumerate(header)}
    Path(path).write_text(json.dumps({"columns": list(header), "data": payload}, indent=1) + "\n")


def write_sidecar(path: str | Path, metadata: dict) -> None:
    """JSON metadata file; the timestamp is the only non-reproducible field."""
    payload = dict(_jsonable(metadata))
    payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
