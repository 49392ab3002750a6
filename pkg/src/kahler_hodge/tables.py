"""Component tables (CSV) and key-value reports.

Tables have one row per grid node in C order, the coordinate columns
``x1..xn`` and one column per basis index labelled by its digit string
(``0`` for the scalar part). Numbers are written with 17 significant
digits, so reading a table back reproduces the coefficients exactly.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .algebra import AlgebraError, basis_index, index_label
from .fields import FormField, GridError, GridSpec

_LABEL = re.compile(r"\d|\[\d+\]")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def parse_label(label: str, n: int) -> tuple:
    """Inverse of :func:`index_label`."""
    if label == "0":
        return ()
    parts = _LABEL.findall(label)
    if "".join(parts) != label:
        raise AlgebraError(f"bad basis label {label!r}")
    return basis_index([int(p.strip("[]")) for p in parts], n)


def write_table(field: FormField, path, indices=None) -> None:
    """Write ``field`` as CSV; ``indices`` fixes the basis columns (default: present ones)."""
    grid = field.grid
    indices = list(field.components) if indices is None else list(indices)
    nodes = grid.nodes()
    cols = [field[idx].ravel() for idx in indices]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(1, grid.n + 1)] + [index_label(i) for i in indices])
        for row in range(grid.size):
            w.writerow([format_float(v) for v in nodes[row]] + [format_float(c[row]) for c in cols])


def read_table(path) -> FormField:
    """Read a table written by :func:`write_table` back into a field."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise GridError(f"{path}: empty table")
    header = rows[0]
    n = sum(1 for h in header if re.fullmatch(r"x\d+", h))
    if n == 0 or header[:n] != [f"x{i}" for i in range(1, n + 1)]:
        raise GridError(f"{path}: header must start with x1..xn")
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise GridError(f"{path}: ragged table")
    axes = []
    for d in range(n):
        vals = np.unique(data[:, d])
        axes.append((float(vals[0]), float(vals[-1]), int(vals.size)))
    grid = GridSpec(tuple(axes))
    if grid.size != data.shape[0] or not np.array_equal(grid.nodes(), data[:, :n]):
        raise GridError(f"{path}: rows do not form a uniform grid in C order")
    comps = {parse_label(h, n): data[:, n + j].reshape(grid.shape) for j, h in enumerate(header[n:])}
    return FormField(grid, comps)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def format_report(header: dict, sections: dict | None = None) -> str:
    """``key: value`` lines, then ``[section]`` blocks of the same form."""
    lines = [f"{k}: {_fmt(v)}" for k, v in header.items()]
    for name, body in (sections or {}).items():
        lines.append("")
        lines.append(f"[{name}]")
        if isinstance(body, dict):
            lines.extend(f"{k}: {_fmt(v)}" for k, v in body.items())
        else:
            lines.extend(str(b) for b in body)
    return "\n".join(lines) + "\n"


def write_report(path, header: dict, sections: dict | None = None) -> str:
    text = format_report(header, sections)
    Path(path).write_text(text, encoding="utf-8")
    return text


def read_report(text: str) -> dict:
    """Parse a report into ``{"": header, section: {...}}`` with string values."""
    out: dict = {"": {}}
    current = out[""]
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("[") and line.endswith("]"):
            current = out.setdefault(line[1:-1], {})
            continue
        key, _, value = line.partition(": ")
        current[key] = value
    return out


__all__ = ["write_table", "read_table", "parse_label", "format_report", "write_report",
           "read_report", "format_float"]
