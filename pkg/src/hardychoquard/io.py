"""Text formats: radial fields, trajectories and key-value result documents.

Field files look like::

    # d=3 alpha=2 p=3 N=2048 r_max=40 grading=algebraic:2
    1.23e-05  1.9e+00  0.0e+00
    ...

one row ``r Re(v) Im(v)`` per node, every number written with 17 significant
digits so a write/read cycle reproduces the values bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import ModelParams, RadialField, make_grid, make_params

__all__ = [
    "FieldFormatError",
    "write_field",
    "read_field",
    "write_rows",
    "write_document",
    "format_scalar",
]

_HEADER_KEYS = ("d", "alpha", "p", "N", "r_max")


class FieldFormatError(ValueError):
    """A field file could not be parsed; the message carries the line number."""


def format_scalar(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if not math.isfinite(x) else f"{float(x):.17g}"
    return str(x)


def write_field(path, f: RadialField, params: ModelParams) -> Path:
    g = f.grid
    path = Path(path)
    vals = np.asarray(f.values, dtype=complex)
    header = (
        f"# d={params.d} alpha={params.alpha:.17g} p={params.p:.17g} "
        f"N={g.n} r_max={g.r_max:.17g} grading={g.grading}\n"
    )
    with open(path, "w") as fh:
        fh.write(header)
        for r, z in zip(g.nodes, vals):
            fh.write(f"{r:.17e} {z.real:.17e} {z.imag:.17e}\n")
    return path


def _parse_header(line: str, where: str) -> dict:
    body = line.lstrip("#").strip()
    out = {}
    for token in body.split():
        key, sep, val = token.partition("=")
        if not sep:
            raise FieldFormatError(f"{where}: header token {token!r} is not key=value")
        out[key] = val
    missing = [k for k in _HEADER_KEYS if k not in out]
    if missing:
        raise FieldFormatError(f"{where}: header is missing {', '.join(missing)}")
    return out


def read_field(path) -> tuple[RadialField, ModelParams]:
    """Parse a field file written by :func:`write_field`.

    Raises FieldFormatError naming the offending line for malformed input.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise FieldFormatError(f"{path}:1: expected a '# d=... alpha=... p=... N=... r_max=...' header")
    hdr = _parse_header(lines[0], f"{path}:1")
    try:
        params = make_params(int(hdr["d"]), float(hdr["alpha"]), float(hdr["p"]))
        grid = make_grid(int(hdr["N"]), float(hdr["r_max"]), hdr.get("grading", "uniform"))
    except ValueError as exc:
        raise FieldFormatError(f"{path}:1: {exc}") from exc
    r = np.empty(grid.n)
    v = np.empty(grid.n, dtype=complex)
    row = 0
    for lineno, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 3:
            raise FieldFormatError(f"{path}:{lineno}: expected 3 columns 'r Re(v) Im(v)', found {len(parts)}")
        try:
            nums = [float(x) for x in parts]
        except ValueError as exc:
            raise FieldFormatError(f"{path}:{lineno}: {exc}") from exc
        if row >= grid.n:
            raise FieldFormatError(f"{path}:{lineno}: more rows than N={grid.n}")
        if not all(math.isfinite(x) for x in nums):
            raise FieldFormatError(f"{path}:{lineno}: non-finite value")
        r[row] = nums[0]
        v[row] = complex(nums[1], nums[2])
        row += 1
    if row != grid.n:
        raise FieldFormatError(f"{path}:{len(lines)}: found {row} rows, header says N={grid.n}")
    bad = np.flatnonzero(np.abs(r - grid.nodes) > 1e-12 * np.maximum(grid.nodes, 1.0))
    if bad.size:
        raise FieldFormatError(f"{path}: radius column does not match the grid described by the header (row {bad[0] + 1})")
    if np.all(v.imag == 0):
        v = v.real
    return RadialField(grid, v), params


def write_rows(path, rows: list[dict], columns, fmt: str = "csv") -> Path:
    """Write diagnostic rows as CSV or JSON lines with 17-digit numbers."""
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(columns)
            for row in rows:
                wr.writerow([format_scalar(row[c]) for c in columns])
    elif fmt == "json-lines":
        with open(path, "w") as fh:
            for row in rows:
                fh.write(json.dumps({c: _jsonable(row[c]) for c in columns}) + "\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def _jsonable(x):
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_document(path, record: dict, fmt: str = "csv") -> Path:
    """A flat record as ``key: value`` lines (or one JSON object for json-lines)."""
    path = Path(path)
    if fmt == "json-lines":
        path.write_text(json.dumps({k: _jsonable(v) for k, v in record.items()}) + "\n")
    else:
        path.write_text("".join(f"{k}: {format_scalar(v)}\n" for k, v in record.items()))
    return path
