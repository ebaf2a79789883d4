"""Frame derivatives, horizontal gradient and divergence, and the contact form."""

from typing import Callable, Optional, Sequence, Union

import numpy as np

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.models.point import HorizontalVector, HPoint
from heisenflow.services.group_service import mul_array
from heisenflow.utils.config import settings
from heisenflow.utils.exceptions import DimensionMismatchError, InvalidParameterError
from heisenflow.utils.validators import check_last_axis, check_same_n, require_positive

ArrayValued = Callable[[np.ndarray], np.ndarray]


def _frame_step(points: np.ndarray, index: int, step: float) -> np.ndarray:
    """``points * exp(step * e_index)``; the exponential of a frame field is a horizontal line."""
    offset = np.zeros(points.shape[-1])
    offset[index] = step
    return mul_array(points, offset)


def _central_difference(
    func: ArrayValued, points: np.ndarray, index: int, step: float
) -> np.ndarray:
    forward = np.asarray(func(_frame_step(points, index, step)), dtype=float)
    backward = np.asarray(func(_frame_step(points, index, -step)), dtype=float)
    return (forward - backward) / (2.0 * step)


def frame_derivative(
    f: ScalarField, direction: int, p: HPoint, h: float = settings.FD_STEP
) -> float:
    """Central difference of ``f`` along the frame direction ``direction`` (1..2n)."""
    require_positive(h, "finite difference step")
    check_same_n(f.n, p.n, "frame_derivative")
    if not 1 <= direction <= 2 * p.n:
        raise InvalidParameterError(f"frame direction must be in 1..{2 * p.n}, got {direction}")
    return float(_central_difference(f.evaluate, p.coords, direction - 1, h))


def horizontal_gradient_array(
    f: ScalarField, points: np.ndarray, h: float = settings.FD_STEP
) -> np.ndarray:
    """Horizontal gradients at many points, shape ``(..., 2n)``."""
    points = check_last_axis(np.asarray(points, dtype=float), 2 * f.n + 1, "points")
    if f.gradient is not None:
        return np.asarray(f.gradient(points), dtype=float)
    columns = [_central_difference(f.evaluate, points, j, h) for j in range(2 * f.n)]
    return np.stack(columns, axis=-1)


def horizontal_gradient(f: ScalarField, p: HPoint, h: float = settings.FD_STEP) -> HorizontalVector:
    """``(X_1 f, .., X_n f, Y_1 f, .., Y_n f)`` at ``p``; analytic when ``f`` provides it."""
    check_same_n(f.n, p.n, "horizontal_gradient")
    return HorizontalVector(horizontal_gradient_array(f, p.coords, h))


def weak_divergence(mu: DiscreteCharge, f: ScalarField, h: float = settings.FD_STEP) -> float:
    """``<div_H mu, f> = -sum_i <grad_H f(x_i), v_i>``."""
    check_same_n(mu.n, f.n, "weak_divergence")
    if mu.is_empty:
        return 0.0
    gradients = horizontal_gradient_array(f, mu.points, h)
    return -float(np.sum(gradients * mu.vectors))


def smooth_divergence_array(
    field: Union[HVectorField, ArrayValued], points: np.ndarray, n: int, h: float = settings.FD_STEP
) -> np.ndarray:
    """Pointwise ``sum_i X_i V_i + Y_i V_{n+i}`` by central differences."""
    func = field.evaluate if isinstance(field, HVectorField) else field
    points = check_last_axis(np.asarray(points, dtype=float), 2 * n + 1, "points")
    total = np.zeros(points.shape[:-1])
    for j in range(2 * n):
        total += _central_difference(lambda q, j=j: np.asarray(func(q))[..., j], points, j, h)
    return total


def smooth_divergence(V: HVectorField, p: HPoint, h: float = settings.FD_STEP) -> float:
    check_same_n(V.n, p.n, "smooth_divergence")
    return float(smooth_divergence_array(V, p.coords, p.n, h))


def contact_form(p: HPoint, tangent: Sequence[float]) -> float:
    """``theta_p(v) = v_z - (1/2) sum_j (x_j v_{y_j} - y_j v_{x_j})``."""
    tangent = np.asarray(tangent, dtype=float)
    if tangent.shape != p.coords.shape:
        raise DimensionMismatchError(
            f"tangent needs {p.coords.shape[0]} coordinates, got {tangent.shape}"
        )
    n = p.n
    twist = np.dot(p.x, tangent[n : 2 * n]) - np.dot(p.y, tangent[:n])
    return float(tangent[-1] - 0.5 * twist)


def check_gradient(
    f: ScalarField, samples: np.ndarray, rel_tol: float = 1e-5, h: float = settings.FD_STEP
) -> bool:
    """Compare the analytic gradient of ``f`` with central differences at ``samples``."""
    if f.gradient is None:
        return True
    samples = np.asarray(samples, dtype=float)
    analytic = np.asarray(f.gradient(samples), dtype=float)
    numeric = np.stack(
        [_central_difference(f.evaluate, samples, j, h) for j in range(2 * f.n)], axis=-1
    )
    scale = np.maximum(np.abs(analytic), 1.0)
    return bool(np.all(np.abs(analytic - numeric) <= rel_tol * scale))


def midpoint_quadrature(
    func: ArrayValued,
    lower: Sequence[float],
    upper: Sequence[float],
    counts: Sequence[int],
    chunk: Optional[int] = 200_000,
) -> float:
    """Tensor midpoint rule for ``func`` over a coordinate box.

    Haar measure on ℍⁿ is Lebesgue measure in these coordinates, so this
    integrates against Haar measure.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    counts = [int(c) for c in counts]
    widths = (upper - lower) / np.asarray(counts)
    axes = [lower[i] + widths[i] * (np.arange(c) + 0.5) for i, c in enumerate(counts)]
    cell = float(np.prod(widths))

    # iterate over the first axis to keep memory flat
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, len(axes) - 1)
    total = 0.0
    for first in axes[0]:
        block = np.column_stack([np.full(rest.shape[0], first), rest])
        if chunk:
            for start in range(0, block.shape[0], chunk):
                total += float(np.sum(func(block[start : start + chunk])))
        else:
            total += float(np.sum(func(block)))
    return total * cell
