"""Result documents: the same record list rendered as CSV or JSON."""

import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Sequence

Record = Dict[str, Any]


def format_value(value: Any, digits: int = 12) -> Optional[str]:
    """Text form of a cell; None for missing values."""
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    if isinstance(value, float) or hasattr(value, "__float__"):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0:
            x = 0.0
        return format(x, f".{digits}g")
    return str(value)


def _json_value(value: Any, digits: int) -> Any:
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    x = float(value)
    if not math.isfinite(x):
        return None
    return float(format(0.0 if x == 0 else x, f".{digits}g"))


def to_csv(records: Sequence[Record], digits: int = 12,
           columns: Optional[List[str]] = None) -> str:
    """Long-form CSV with a header row; missing values are empty cells."""
    columns = columns or (list(records[0].keys()) if records else [])
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        row = [format_value(record.get(c), digits) for c in columns]
        writer.writerow(["" if cell is None else cell for cell in row])
    return buffer.getvalue()


def to_json(records: Sequence[Record], digits: int = 12) -> str:
    """JSON array of objects with insertion-ordered keys."""
    payload = [{k: _json_value(v, digits) for k, v in record.items()} for record in records]
    return json.dumps(payload, indent=2) + "\n"


def render(records: Sequence[Record], fmt: str = "csv", digits: int = 12,
           columns: Optional[List[str]] = None) -> str:
    if fmt == "csv":
        return to_csv(records, digits, columns)
    if fmt == "json":
        return to_json(records, digits)
    raise ValueError(f"unknown output format '{fmt}'")
