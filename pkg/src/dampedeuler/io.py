"""Deterministic serialization: 17-significant-digit JSON/CSV and atomic writes."""
import hashlib
import io
import json
import math
import os
import tempfile

import numpy as np

__all__ = ["fmt_float", "dumps", "atomic_write", "write_json", "write_csv",
           "read_csv_columns", "config_hash"]


def fmt_float(x):
    """Round-trip exact text for a double (17 significant digits)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no NaN/inf literals
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def atomic_write(path, text):
    """Write ``text`` to a temporary file beside ``path``, then rename over it."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write(path, dumps(obj))


def write_csv(path, header, columns):
    """Columns of numbers (or strings) to CSV, floats at 17 significant digits."""
    n = len(columns[0]) if columns else 0
    if any(len(c) != n for c in columns):
        raise ValueError("columns differ in length")
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for i in range(n):
        cells = []
        for c in columns:
            v = c[i]
            cells.append(v if isinstance(v, str) else fmt_float(v))
        buf.write(",".join(cells) + "\n")
    atomic_write(path, buf.getvalue())


def read_csv_columns(path):
    """Read a numeric CSV written by :func:`write_csv` into ``{name: array}``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: expected {len(header)} columns")
    return {name: data[:, i] for i, name in enumerate(header)}


def config_hash(config, length=12):
    """Short content hash of a JSON-serializable configuration."""
    text = json.dumps(json.loads(dumps(config)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:length]
