"""Deterministic JSON and CSV emission.

Artifacts must be byte-identical across runs with the same inputs, so floats
are printed through a fixed '%.9g' format instead of repr, dict keys keep
their insertion order (reports are built in a fixed order), and every file
ends with a single newline.
"""

from __future__ import annotations

import json

import numpy as np

FLOAT_FORMAT = "%.9g"


def format_float(value: float) -> str:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"non-finite value in artifact: {value!r}")
    text = FLOAT_FORMAT % value
    # keep a float-typed token so round-tripping preserves the JSON type
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def canonical_dumps(obj, indent: int = 0) -> str:
    """Serialize with fixed float formatting; containers keep insertion order."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (np.floating, float)):
        return format_float(obj)
    if isinstance(obj, (np.integer, int)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [canonical_dumps(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{json.dumps(str(k), ensure_ascii=False)}: {canonical_dumps(v, indent + 2)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def dump_canonical(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(obj))
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    """Write rows of dicts as CSV with the same float formatting as JSON."""

    def cell(value) -> str:
        if isinstance(value, (np.floating, float)):
            return format_float(value)
        return str(value)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(row[col]) for col in header) + "\n")
