"""JSON file formats for matrices and Kraus channels.

A matrix file is ``{"dim": d, "entries": [[[re, im], ...], ...]}`` (row
major); a channel file is ``{"in_dim": d, "out_dim": m, "kraus": [E, ...]}``
with each ``E`` an ``m x d`` entries array. Numbers are written with 17
significant digits so values survive a write/read cycle bit for bit.
"""

import json

import numpy as np

from .errors import InputError


def _num(x):
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".17g")


def _entries_text(m):
    rows = []
    for row in np.asarray(m, dtype=complex):
        rows.append("[" + ", ".join(f"[{_num(z.real)}, {_num(z.imag)}]" for z in row) + "]")
    return "[" + ", ".join(rows) + "]"


def dump_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return f'{{"dim": {m.shape[0]}, "entries": {_entries_text(m)}}}\n'


def dump_channel(kraus):
    ops = [np.asarray(k, dtype=complex) for k in kraus]
    out_dim, in_dim = ops[0].shape
    body = ", ".join(_entries_text(k) for k in ops)
    return f'{{"in_dim": {in_dim}, "out_dim": {out_dim}, "kraus": [{body}]}}\n'


def _load(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _count(obj, key, source):
    value = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InputError(f"{source}: field '{key}' must be a positive integer")
    return value


def _parse_entries(raw, rows, cols, field, source):
    if not isinstance(raw, list) or len(raw) != rows:
        raise InputError(f"{source}: field '{field}' must be a list of {rows} rows")
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"{source}: field '{field}[{i}]' must hold {cols} entries")
        for j, z in enumerate(row):
            ok = (isinstance(z, list) and len(z) == 2
                  and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z))
            if not ok:
                raise InputError(f"{source}: field '{field}[{i}][{j}]' must be a [re, im] pair")
            if not all(np.isfinite(z)):
                raise InputError(f"{source}: field '{field}[{i}][{j}]' is not finite")
            out[i, j] = complex(z[0], z[1])
    return out


def parse_matrix(text, source="<input>"):
    obj = _load(text, source)
    if not isinstance(obj, dict):
        raise InputError(f"{source}: top level must be an object")
    dim = _count(obj, "dim", source)
    return _parse_entries(obj.get("entries"), dim, dim, "entries", source)


def parse_channel(text, source="<input>"):
    obj = _load(text, source)
    if not isinstance(obj, dict):
        raise InputError(f"{source}: top level must be an object")
    in_dim = _count(obj, "in_dim", source)
    out_dim = _count(obj, "out_dim", source)
    kraus = obj.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise InputError(f"{source}: field 'kraus' must be a non-empty list")
    ops = []
    for a, raw in enumerate(kraus):
        if isinstance(raw, dict):
            raw = raw.get("entries")
        ops.append(_parse_entries(raw, out_dim, in_dim, f"kraus[{a}]", source))
    return ops


def read_matrix(path):
    with open(path) as fh:
        return parse_matrix(fh.read(), source=str(path))


def read_channel(path):
    with open(path) as fh:
        return parse_channel(fh.read(), source=str(path))


def write_matrix(path, m):
    with open(path, "w") as fh:
        fh.write(dump_matrix(m))


def write_channel(path, kraus):
    with open(path, "w") as fh:
        fh.write(dump_channel(kraus))
