"""Deterministic JSON writing.

Floats are rendered with 17 significant digits so serialized models survive
a round trip bit-exactly and reruns produce byte-identical files.
"""

import json
import math

import numpy as np


def _render(obj, parts):
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x!r} is not serializable")
        parts.append(format(x, ".17g"))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _render(obj.tolist(), parts)
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(", ")
            _render(item, parts)
        parts.append("]")
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            if i:
                parts.append(", ")
            parts.append(json.dumps(key))
            parts.append(": ")
            _render(value, parts)
        parts.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def dumps(obj) -> str:
    """Serialize to a JSON string with 17-significant-digit floats."""
    parts: list[str] = []
    _render(obj, parts)
    return "".join(parts)


def dump(obj, path) -> None:
    """Write ``obj`` as JSON text plus a trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
