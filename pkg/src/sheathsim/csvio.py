"""Deterministic CSV and metadata output.

Every float is printed with 17 significant digits so rereading a file
round-trips exactly.  Files are written to a temporary name in the target
directory and renamed into place, so readers never observe partial output.
"""

import json
import os
import tempfile


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], columns: list) -> None:
    """Write named columns of equal length as CSV."""
    if len(header) != len(columns):
        raise ValueError("header and column count differ")
    n_rows = len(columns[0])
    for col in columns:
        if len(col) != n_rows:
            raise ValueError("columns must have equal length")
    lines = [",".join(header)]
    for i in range(n_rows):
        lines.append(",".join(format_float(col[i]) for col in columns))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_rows(path: str, header: list[str], rows: list) -> None:
    """Write rows of mixed str/float cells as CSV."""
    lines = [",".join(header)]
    for row in rows:
        cells = [cell if isinstance(cell, str) else format_float(cell) for cell in row]
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_metadata(path: str, entries: dict) -> None:
    """Write a key/value sidecar as sorted JSON (no timestamps, reproducible)."""
    clean = {}
    for key, value in entries.items():
        if isinstance(value, float):
            clean[key] = float(format_float(value))
        else:
            clean[key] = value
    _atomic_write(path, json.dumps(clean, sort_keys=True, indent=2) + "\n")
