"""Scalar and horizontal vector fields on ℍⁿ.

Fields are vectorized: ``func`` maps an array of points with shape
``(..., 2n+1)`` to values of shape ``(...)`` (scalar) or ``(..., 2n)``
(frame coefficients).
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from heisenflow.models.point import HorizontalVector, HPoint
from heisenflow.utils.validators import check_last_axis

PointsLike = Union[HPoint, np.ndarray]
ArrayFunction = Callable[[np.ndarray], np.ndarray]


def _as_points(points: PointsLike, n: int) -> np.ndarray:
    if isinstance(points, HPoint):
        points = points.coords
    return check_last_axis(np.asarray(points, dtype=float), 2 * n + 1, "points")


@dataclass(frozen=True)
class ScalarField:
    """A smooth test function.

    ``gradient``, when given, returns the analytic horizontal gradient
    ``(X_1 f, .., Y_n f)`` with shape ``(..., 2n)``.
    """

    func: ArrayFunction
    n: int
    gradient: Optional[ArrayFunction] = None
    name: str = ""

    def evaluate(self, points: PointsLike) -> np.ndarray:
        return np.asarray(self.func(_as_points(points, self.n)), dtype=float)

    def __call__(self, point: PointsLike) -> Union[float, np.ndarray]:
        values = self.evaluate(point)
        return float(values) if values.ndim == 0 else values


@dataclass(frozen=True)
class HVectorField:
    """A horizontal vector field given by its frame coefficients.

    Attributes:
        growth_bound: constant c with |field(p)| <= c (1 + ||p||), if known
        sup_norm: bound on |field| everywhere, if known
        smooth: False for fields that may not be integrated as flows
    """

    func: ArrayFunction
    n: int
    growth_bound: Optional[float] = None
    sup_norm: Optional[float] = None
    smooth: bool = True
    name: str = ""

    def evaluate(self, points: PointsLike) -> np.ndarray:
        points = _as_points(points, self.n)
        values = np.asarray(self.func(points), dtype=float)
        return np.broadcast_to(values, points.shape[:-1] + (2 * self.n,))

    def __call__(self, point: HPoint) -> HorizontalVector:
        return HorizontalVector(self.evaluate(point))

    def negated(self) -> "HVectorField":
        """The field with reversed direction, used for backward flows."""
        func = self.func
        return HVectorField(
            func=lambda p: -np.asarray(func(p), dtype=float),
            n=self.n,
            growth_bound=self.growth_bound,
            sup_norm=self.sup_norm,
            smooth=self.smooth,
            name=f"-{self.name}" if self.name else "",
        )

    def check_growth(self, radius: float = 4.0, samples: int = 7) -> bool:
        """Sampled check of the declared growth bound on a coordinate grid.

        The grid covers the box of half-width ``radius`` horizontally and
        ``radius**2`` vertically, which contains the norm ball of that radius.
        """
        if self.growth_bound is None:
            return True

        axes = [np.linspace(-radius, radius, samples)] * (2 * self.n)
        axes.append(np.linspace(-radius**2, radius**2, samples))
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2 * self.n + 1)
        speeds = np.linalg.norm(self.evaluate(grid), axis=-1)
        h2 = np.sum(grid[:, : 2 * self.n] ** 2, axis=-1)
        norms = (h2**2 + grid[:, -1] ** 2) ** 0.25
        bound = self.growth_bound * (1.0 + norms)
        return bool(np.all(speeds <= bound * (1.0 + 1e-12)))
