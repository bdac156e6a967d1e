"""Channel/code JSON files, CSV rows and 17-digit number formatting.

Complex numbers are ``[re, im]`` pairs; matrices are lists of rows.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .channels import KrausChannel
from .errors import ShapeError, UnitalCapError
from .recovery import CodeSpec


class FormatError(UnitalCapError, ValueError):
    """A file does not follow the expected JSON layout."""


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become ``null``.
    """
    return _dump(obj, indent, 0)


def _dump(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, type(None), str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) for x in seq):
            return "[" + ", ".join(_dump(x, indent, level + 1) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + _dump(x, indent, level + 1) for x in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def matrix_from_json(rows, what: str = "matrix") -> np.ndarray:
    try:
        a = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: entries must be [re, im] number pairs") from exc
    if a.ndim != 3 or a.shape[2] != 2:
        raise FormatError(f"{what}: expected rows of [re, im] pairs, got array of shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def _loads(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError("top-level JSON value must be an object")
    return data


def _require(data: dict, key: str, kind):
    if key not in data:
        raise FormatError(f"missing field {key!r}")
    val = data[key]
    if kind is int and (not isinstance(val, int) or isinstance(val, bool)):
        raise FormatError(f"field {key!r} must be an integer")
    return val


def channel_to_json(ch: KrausChannel) -> dict:
    return {"d_in": ch.d_in, "d_out": ch.d_out, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(text: str) -> KrausChannel:
    data = _loads(text)
    d_in, d_out = _require(data, "d_in", int), _require(data, "d_out", int)
    ops = _require(data, "kraus", list)
    if not ops:
        raise FormatError("field 'kraus' must list at least one operator")
    mats = [matrix_from_json(op, f"kraus[{i}]") for i, op in enumerate(ops)]
    for i, m in enumerate(mats):
        if m.shape != (d_out, d_in):
            raise ShapeError(f"kraus[{i}] has shape {m.shape}, expected ({d_out}, {d_in})")
    return KrausChannel(np.stack(mats))


def code_to_json(code: CodeSpec) -> dict:
    return {"n": code.n, "d": code.d, "d_T": code.d_T, "d_C": code.d_C,
            "encoder": matrix_to_json(code.encoder)}


def code_from_json(text: str) -> CodeSpec:
    data = _loads(text)
    fields = {k: _require(data, k, int) for k in ("n", "d", "d_T", "d_C")}
    W = matrix_from_json(_require(data, "encoder", list), "encoder")
    return CodeSpec(encoder=W, **fields)


def csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    return str(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(csv_cell(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"

