"""Deterministic CSV writing.

Floats are written with ``repr`` (shortest round-trip form), so reading a file back
reproduces the exact doubles and two runs with the same inputs are byte-identical.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, is_dataclass
from typing import Any

import numpy as np


def format_cell(value: Any) -> str:
    """Convert one value to its CSV text."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return repr(f)
    return str(value)


def as_mapping(row: Any) -> Mapping[str, Any]:
    if isinstance(row, Mapping):
        return row
    if hasattr(row, "as_row"):
        return row.as_row()
    if is_dataclass(row) and not isinstance(row, type):
        return asdict(row)
    raise TypeError(f"cannot convert {type(row).__name__} to a CSV row")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Any]) -> None:
    """Write rows (mappings, dataclasses or objects with ``as_row``) in header order."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            m = as_mapping(row)
            writer.writerow([format_cell(m.get(col)) for col in header])


def read_csv(path: str) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
