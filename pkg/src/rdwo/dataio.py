"""Deterministic text I/O: sample ingestion from CSV and record emission.

Floats are emitted with 17 significant digits, enough to round-trip IEEE
doubles exactly, so repeated runs over the same input are byte-identical.
"""

from __future__ import annotations

import json
from typing import Iterator, Sequence

import numpy as np

from .core import Sample

__all__ = [
    "EXPECTED_HEADER",
    "InputFormatError",
    "iter_samples",
    "read_samples",
    "format_float",
    "json_record",
    "csv_row",
    "parse_grid",
    "parse_grid_list",
]

EXPECTED_HEADER = "k,phi,y"


class InputFormatError(ValueError):
    """Malformed input data; the message carries the 1-based line number."""


def iter_samples(path) -> Iterator[Sample]:
    """Yield validated samples from a CSV file with header ``k,phi,y``.

    Blank lines are ignored.  A wrong header, a row with the wrong field
    count, non-numeric or non-finite values, and duplicate indices all raise
    :class:`InputFormatError` naming the offending line.  A file with no
    content at all yields nothing.
    """
    seen: set[int] = set()
    header_done = False
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if not header_done:
                if line != EXPECTED_HEADER:
                    raise InputFormatError(
                        f"line {line_no}: expected header {EXPECTED_HEADER!r}, got {line!r}"
                    )
                header_done = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise InputFormatError(
                    f"line {line_no}: expected 3 comma-separated fields, got {len(parts)}"
                )
            try:
                sample = Sample(index=int(parts[0]), phi=float(parts[1]), y=float(parts[2]))
            except ValueError as exc:
                raise InputFormatError(f"line {line_no}: {exc}") from None
            if sample.index in seen:
                raise InputFormatError(
                    f"line {line_no}: duplicate sample index {sample.index}"
                )
            seen.add(sample.index)
            yield sample


def read_samples(path) -> list[Sample]:
    return list(iter_samples(path))


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot emit value of type {type(value).__name__}")


def json_record(pairs: Sequence[tuple[str, object]]) -> str:
    """One JSON object per line, field order preserved."""
    body = ", ".join(f'"{key}": {_json_scalar(value)}' for key, value in pairs)
    return "{" + body + "}"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"cannot emit value of type {type(value).__name__}")


def csv_row(values: Sequence[object]) -> str:
    return ",".join(_csv_cell(v) for v in values)


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``min:max:count`` into an evenly spaced query grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must have the form min:max:count, got {text!r}")
    try:
        lo = float(parts[0])
        hi = float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise ValueError(f"grid must have the form min:max:count, got {text!r}") from None
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"grid endpoints must be finite, got {text!r}")
    if count < 1:
        raise ValueError(f"grid count must be >= 1, got {count}")
    return tuple(float(v) for v in np.linspace(lo, hi, count))


def parse_grid_list(text: str) -> tuple[float, ...]:
    """Parse a comma-separated list of query points."""
    items = [chunk.strip() for chunk in text.split(",")]
    if not any(items):
        raise ValueError("query list must be nonempty")
    try:
        grid = tuple(float(chunk) for chunk in items if chunk)
    except ValueError:
        raise ValueError(f"query list must contain numbers, got {text!r}") from None
    if not all(np.isfinite(v) for v in grid):
        raise ValueError("query points must be finite")
    return grid
