"""Points of the Heisenberg group, horizontal vectors, and the Cayley model types.

Real coordinates are ordered ``(x_1..x_n, y_1..y_n, z)``; horizontal vectors
hold frame coefficients ``(X_1..X_n, Y_1..Y_n)``.
"""

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from heisenflow.utils.exceptions import DimensionMismatchError
from heisenflow.utils.validators import as_float_array, group_index

SPHERE_TOLERANCE = 1e-9


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=values.dtype, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point of ℍⁿ."""

    coords: np.ndarray

    def __post_init__(self):
        coords = as_float_array(self.coords, "point coordinates")
        if coords.ndim != 1:
            raise DimensionMismatchError("point coordinates must be a flat vector")
        group_index(coords.shape[0])
        object.__setattr__(self, "coords", _frozen(coords))

    @classmethod
    def identity(cls, n: int) -> "HPoint":
        return cls(np.zeros(2 * n + 1))

    @classmethod
    def from_parts(cls, x: Sequence[float], y: Sequence[float], z: float) -> "HPoint":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape:
            raise DimensionMismatchError(f"x and y lengths differ: {x.size} vs {y.size}")
        return cls(np.concatenate([x, y, [float(z)]]))

    @property
    def n(self) -> int:
        return (self.coords.shape[0] - 1) // 2

    @property
    def x(self) -> np.ndarray:
        return self.coords[: self.n]

    @property
    def y(self) -> np.ndarray:
        return self.coords[self.n : 2 * self.n]

    @property
    def z(self) -> float:
        return float(self.coords[-1])

    @property
    def horizontal(self) -> np.ndarray:
        return self.coords[: 2 * self.n]

    def to_list(self) -> list[float]:
        return [float(c) for c in self.coords]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HPoint):
            return NotImplemented
        return bool(np.array_equal(self.coords, other.coords))

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())

    def __repr__(self) -> str:
        return f"HPoint({self.to_list()})"


@dataclass(frozen=True, eq=False)
class HorizontalVector:
    """Frame coefficients of a horizontal tangent vector; the frame is orthonormal."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = as_float_array(self.coeffs, "vector coefficients")
        if coeffs.ndim != 1 or coeffs.shape[0] < 2 or coeffs.shape[0] % 2:
            raise DimensionMismatchError(
                f"horizontal vector length must be 2n, got shape {coeffs.shape}"
            )
        object.__setattr__(self, "coeffs", _frozen(coeffs))

    @classmethod
    def zero(cls, n: int) -> "HorizontalVector":
        return cls(np.zeros(2 * n))

    @property
    def n(self) -> int:
        return self.coeffs.shape[0] // 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def to_list(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HorizontalVector):
            return NotImplemented
        return bool(np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self) -> int:
        return hash(self.coeffs.tobytes())

    def __repr__(self) -> str:
        return f"HorizontalVector({self.to_list()})"


@dataclass(frozen=True, eq=False)
class ComplexPoint:
    """A point of the complex model ``(z, t)`` with ``z`` in ℂⁿ."""

    zc: np.ndarray
    t: float

    def __post_init__(self):
        zc = np.atleast_1d(np.asarray(self.zc, dtype=complex))
        if zc.ndim != 1 or not np.all(np.isfinite(zc)) or not np.isfinite(self.t):
            raise DimensionMismatchError("complex point must be a finite vector and scalar")
        object.__setattr__(self, "zc", _frozen(zc))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.zc.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ComplexPoint):
            return NotImplemented
        return bool(np.array_equal(self.zc, other.zc)) and self.t == other.t

    def __hash__(self) -> int:
        return hash((self.zc.tobytes(), self.t))


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point ``(w, w0)`` of the unit sphere in ℂⁿ⁺¹."""

    w: np.ndarray
    w0: complex
    tolerance: float = field(default=SPHERE_TOLERANCE, repr=False)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=complex))
        w0 = complex(self.w0)
        radius = float(np.sum(np.abs(w) ** 2) + abs(w0) ** 2)
        if abs(radius - 1.0) > self.tolerance:
            raise DimensionMismatchError(f"point is off the unit sphere: |w|^2+|w0|^2={radius}")
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "w0", w0)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def as_vector(self) -> np.ndarray:
        """The point as a flat complex vector ``(w, w0)``."""
        return np.concatenate([self.w, [self.w0]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpherePoint):
            return NotImplemented
        return bool(np.array_equal(self.w, other.w)) and self.w0 == other.w0

    def __hash__(self) -> int:
        return hash((self.w.tobytes(), self.w0))


class PointAtInfinity:
    """Sentinel for the point added by the one-point compactification."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (PointAtInfinity, ())


INFINITY = PointAtInfinity()

PointOrInfinity = Union[HPoint, PointAtInfinity]


def symplectic_form(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``omega(a, b) = <a_x, b_y> - <a_y, b_x>`` over the trailing axis of length 2n."""
    n = a.shape[-1] // 2
    return np.sum(a[..., :n] * b[..., n:], axis=-1) - np.sum(a[..., n:] * b[..., :n], axis=-1)
