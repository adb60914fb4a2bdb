"""CSV/JSON readers and writers.

Tables are CSV with `#`-prefixed metadata lines (TOML `key = value` syntax)
followed by one header row. Floats are written as their shortest round-trip
repr, so files are exact and deterministic.
"""

import csv
import io
import json
import os
import tempfile

import numpy as np

from .errors import InvalidParameter


def _num(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return _num(v)
    return json.dumps(str(v))


def meta_lines(meta):
    return [f"# {k} = {_toml_value(v)}" for k, v in meta.items() if v is not None]


def atomic_write(path, text):
    """Write via a temporary file so a failed run leaves nothing half-written."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_text(columns, meta=None, fmt="csv"):
    """Render named columns (dict of equal-length sequences)."""
    names = list(columns)
    n = len(columns[names[0]]) if names else 0
    if fmt == "json":
        doc = {"meta": {k: v for k, v in (meta or {}).items() if v is not None}}
        doc["columns"] = {k: [_jsonable(v) for v in columns[k]] for k in names}
        return json.dumps(doc, indent=1, default=_jsonable) + "\n"
    buf = io.StringIO()
    for line in meta_lines(meta or {}):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for i in range(n):
        w.writerow([_num(columns[k][i]) for k in names])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def matrix_text(row_axis, col_axis, matrix, row_name="p_initial_recoils", weights=None, meta=None):
    """Matrix CSV: header row of column-axis values, then one row per row-axis value."""
    buf = io.StringIO()
    for line in meta_lines(meta or {}):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    lead = [row_name] + (["weight"] if weights is not None else [])
    w.writerow(lead + [_num(c) for c in col_axis])
    for i, r in enumerate(row_axis):
        head = [_num(r)] + ([_num(weights[i])] if weights is not None else [])
        w.writerow(head + [_num(v) for v in matrix[i]])
    return buf.getvalue()


def read_table(path):
    """Read a CSV table written by `table_text`; returns (meta, {name: ndarray})."""
    import tomli

    meta_src, rows = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                meta_src.append(line[1:].strip())
            elif line.strip():
                rows.append(line)
    if not rows:
        raise InvalidParameter(f"{path}: no table rows")
    try:
        meta = tomli.loads("\n".join(meta_src))
    except tomli.TOMLDecodeError:
        meta = {}
    reader = csv.reader(rows)
    names = next(reader)
    data = [r for r in reader if r]
    try:
        cols = {k: np.array([float(r[i]) for r in data]) for i, k in enumerate(names)}
    except (ValueError, IndexError) as exc:
        raise InvalidParameter(f"{path}: malformed numeric table ({exc})") from exc
    return meta, cols


def read_matrix(path):
    """Plain-text matrix: whitespace- or comma-delimited, `#` comments ignored."""
    with open(path) as fh:
        text = "".join(line for line in fh if not line.lstrip().startswith("#"))
    delim = "," if "," in text else None
    try:
        m = np.loadtxt(io.StringIO(text), delimiter=delim, ndmin=2)
    except ValueError as exc:
        raise InvalidParameter(f"{path}: malformed matrix ({exc})") from exc
    return m


def profile_columns(profile, pmax=None):
    p, d = profile.momentum, profile.density
    if pmax is not None:
        sel = np.abs(p) <= pmax
        p, d = p[sel], d[sel]
    return {"momentum_recoils": p, "probability_density": d}


def dump_profile(profile, path, pmax=None, meta=None, fmt="csv"):
    """Write a fine momentum distribution (momentum_recoils, probability_density)."""
    atomic_write(path, table_text(profile_columns(profile, pmax), meta, fmt))
