"""Deterministic text formatting for output files."""

import json
import math
from typing import Any

SIGNIFICANT_DIGITS = 17


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (round-trip exact)."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value}")
    return format(value, f".{SIGNIFICANT_DIGITS}g")


def dumps(obj: Any) -> str:
    """Serialize ``obj`` as compact JSON with every float at 17 significant digits.

    Keys keep insertion order. Numpy arrays and scalars are accepted.
    """
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def _write(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, str):
        parts.append(_quote(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for index, (key, value) in enumerate(obj.items()):
            if index:
                parts.append(",")
            parts.append(_quote(str(key)))
            parts.append(":")
            _write(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for index, value in enumerate(obj):
            if index:
                parts.append(",")
            _write(value, parts)
        parts.append("]")
    elif hasattr(obj, "tolist"):
        _write(obj.tolist(), parts)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _quote(text: str) -> str:
    return json.dumps(text)


def format_duration(seconds: float) -> str:
    """Human readable duration for log lines."""
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    minutes, rest = divmod(seconds, 60)
    return f"{int(minutes)}m{rest:.0f}s"
