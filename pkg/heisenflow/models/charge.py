"""Discrete horizontal vector charges."""

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Tuple, Union

import numpy as np

from heisenflow.models.fields import HVectorField
from heisenflow.models.point import HorizontalVector, HPoint
from heisenflow.utils.exceptions import DimensionMismatchError
from heisenflow.utils.validators import as_float_array, check_last_axis, check_same_n

PointInput = Union[HPoint, Sequence[float], np.ndarray]
VectorInput = Union[HorizontalVector, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class DiscreteCharge:
    """Finitely many atoms ``(x_i, v_i)``.

    Each atom stands for the charge ``alpha(x_i) q_i`` with weight
    ``q_i = |v_i|`` and direction ``alpha = v_i / |v_i|``. Zero vectors are
    dropped on construction.
    """

    n: int
    points: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatchError(f"group index must be positive, got {self.n}")
        points = np.atleast_2d(as_float_array(self.points, "charge points"))
        vectors = np.atleast_2d(as_float_array(self.vectors, "charge vectors"))
        check_last_axis(points, 2 * self.n + 1, "charge points")
        check_last_axis(vectors, 2 * self.n, "charge vectors")
        if points.shape[0] != vectors.shape[0]:
            raise DimensionMismatchError(
                f"{points.shape[0]} points but {vectors.shape[0]} vectors"
            )

        keep = np.any(vectors != 0.0, axis=1)
        points = np.array(points[keep], copy=True)
        vectors = np.array(vectors[keep], copy=True)
        points.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def empty(cls, n: int) -> "DiscreteCharge":
        return cls(n, np.zeros((0, 2 * n + 1)), np.zeros((0, 2 * n)))

    @classmethod
    def from_atoms(
        cls, n: int, atoms: Iterable[Tuple[PointInput, VectorInput]]
    ) -> "DiscreteCharge":
        points, vectors = [], []
        for point, vector in atoms:
            if isinstance(point, HPoint):
                check_same_n(point.n, n, "atom point")
                point = point.coords
            if isinstance(vector, HorizontalVector):
                check_same_n(vector.n, n, "atom vector")
                vector = vector.coeffs
            points.append(np.asarray(point, dtype=float))
            vectors.append(np.asarray(vector, dtype=float))
        if not points:
            return cls.empty(n)
        for point in points:
            check_last_axis(point, 2 * n + 1, "atom point")
        for vector in vectors:
            check_last_axis(vector, 2 * n, "atom vector")
        return cls(n, np.stack(points), np.stack(vectors))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    @property
    def weights(self) -> np.ndarray:
        """Atom weights ``|v_i|``."""
        return np.linalg.norm(self.vectors, axis=1)

    @property
    def directions(self) -> np.ndarray:
        """Unit directions ``v_i / |v_i|``."""
        return self.vectors / self.weights[:, None]

    @property
    def variation(self) -> float:
        """Total variation ``sum |v_i|``."""
        return float(np.sum(self.weights))

    def atoms(self) -> Iterator[Tuple[HPoint, HorizontalVector]]:
        for point, vector in zip(self.points, self.vectors):
            yield HPoint(point), HorizontalVector(vector)

    def pair(self, field: HVectorField) -> float:
        """The pairing ``<mu, Phi> = sum <Phi(x_i), v_i>``."""
        check_same_n(field.n, self.n, "field")
        if self.is_empty:
            return 0.0
        values = field.evaluate(self.points)
        return float(np.sum(values * self.vectors))

    def scaled(self, factor: float) -> "DiscreteCharge":
        return DiscreteCharge(self.n, self.points, self.vectors * float(factor))

    def concatenate(self, other: "DiscreteCharge") -> "DiscreteCharge":
        check_same_n(self.n, other.n, "charge concatenation")
        return DiscreteCharge(
            self.n,
            np.concatenate([self.points, other.points]),
            np.concatenate([self.vectors, other.vectors]),
        )

    def restrict(self, mask: np.ndarray) -> "DiscreteCharge":
        """Atoms selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        return DiscreteCharge(self.n, self.points[mask], self.vectors[mask])
