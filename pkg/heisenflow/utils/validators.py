"""Input validation helpers shared by the services."""

import json
from pathlib import Path
from typing import Optional, Sequence, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from heisenflow.utils.exceptions import DimensionMismatchError, InputError, InvalidParameterError

ArrayLike = Union[Sequence[float], np.ndarray]
ModelT = TypeVar("ModelT", bound=BaseModel)


def require_positive(value: float, name: str) -> float:
    """Return ``value`` as float, raising if it is not a finite positive number."""
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")
    return value


def as_float_array(values: ArrayLike, name: str = "values") -> np.ndarray:
    """Convert to a float array and reject NaN or infinite entries."""
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    return array


def check_last_axis(array: np.ndarray, length: int, name: str = "array") -> np.ndarray:
    """Check the trailing dimension of ``array``.

    Returns:
        The array unchanged

    Raises:
        DimensionMismatchError: If the last axis is not ``length`` long
    """
    if array.ndim == 0 or array.shape[-1] != length:
        got = array.shape[-1] if array.ndim else 0
        raise DimensionMismatchError(f"{name} needs trailing length {length}, got {got}")
    return array


def group_index(point_length: int) -> int:
    """Return n for a coordinate vector of length 2n+1."""
    if point_length < 3 or point_length % 2 == 0:
        raise DimensionMismatchError(
            f"point length must be 2n+1 with n >= 1, got {point_length}"
        )
    return (point_length - 1) // 2


def check_same_n(n_a: int, n_b: int, what: Optional[str] = None) -> int:
    """Raise unless two group indices agree."""
    if n_a != n_b:
        label = f" for {what}" if what else ""
        raise DimensionMismatchError(f"group index mismatch{label}: n={n_a} vs n={n_b}")
    return n_a


def validate_json_file(path: Union[str, Path], model: Type[ModelT], what: str = "file") -> ModelT:
    """Read a JSON file and validate it against a pydantic model.

    Raises:
        InputError: If the file is missing, not JSON, or fails validation. The
            location is ``line L, column C`` for syntax errors and the dotted
            field path for schema errors.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {what}: {exc.strerror}", path=str(path)) from exc

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            exc.msg, path=str(path), location=f"line {exc.lineno}, column {exc.colno}"
        ) from exc

    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise InputError(first["msg"], path=str(path), location=location) from exc
