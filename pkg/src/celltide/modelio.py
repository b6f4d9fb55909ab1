"""Model-file JSON helpers: 17-significant-digit float output and
shape-checked field extraction with path-bearing errors."""

import json

import numpy as np


class ModelFormatError(ValueError):
    """Model file violates the schema; message names the offending field."""


def _encode(obj) -> str:
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats printed to 17 significant digits (round-trip exact)."""
    return _encode(obj)


def loads(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid model JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ModelFormatError("model file must be a JSON object")
    return obj


def require(obj: dict, path: str):
    """Walk a dotted path, raising ModelFormatError naming the missing field."""
    node = obj
    walked = []
    for key in path.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            raise ModelFormatError(f"missing field {'.'.join(walked)!r}")
        node = node[key]
    return node


def require_array(obj: dict, path: str, shape: tuple) -> np.ndarray:
    arr = np.asarray(require(obj, path), dtype=np.float64)
    if arr.shape != shape:
        raise ModelFormatError(f"field {path!r} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"field {path!r} contains non-finite values")
    return arr


def check_type_tag(obj: dict, expected: str) -> None:
    tag = require(obj, "type")
    if tag != expected:
        raise ModelFormatError(f"field 'type' is {tag!r}, expected {expected!r}")
