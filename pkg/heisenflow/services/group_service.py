"""Group arithmetic on ℍⁿ in the half convention.

The law is ``(h, z)(h', z') = (h + h', z + z' + omega(h, h') / 2)`` with
``omega(a, b) = <a_x, b_y> - <a_y, b_x>``. The left-invariant frame is
``X_i = d/dx_i - (y_i / 2) d/dz`` and ``Y_i = d/dy_i + (x_i / 2) d/dz``.

The ``*_array`` functions broadcast over leading axes of ``(..., 2n+1)``
arrays; the point-level functions wrap them for :class:`HPoint`.
"""

from typing import Union

import numpy as np

from heisenflow.models.point import HPoint, symplectic_form
from heisenflow.utils.exceptions import DimensionMismatchError, InvalidParameterError
from heisenflow.utils.validators import check_same_n

PointLike = Union[HPoint, np.ndarray]


def _coords(p: PointLike) -> np.ndarray:
    return p.coords if isinstance(p, HPoint) else np.asarray(p, dtype=float)


def mul_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Broadcasting product ``p * q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != q.shape[-1]:
        raise DimensionMismatchError(f"point lengths differ: {p.shape[-1]} vs {q.shape[-1]}")
    horizontal = p[..., :-1] + q[..., :-1]
    z = p[..., -1] + q[..., -1] + 0.5 * symplectic_form(p[..., :-1], q[..., :-1])
    return np.concatenate([horizontal, z[..., None]], axis=-1)


def inv_array(p: np.ndarray) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def dilate_array(lam: float, p: np.ndarray) -> np.ndarray:
    if not lam > 0:
        raise InvalidParameterError(f"dilation factor must be positive, got {lam}")
    p = np.asarray(p, dtype=float)
    scale = np.full(p.shape[-1], lam)
    scale[-1] = lam * lam
    return p * scale


def homogeneous_norm_array(p: np.ndarray) -> np.ndarray:
    """``((|h|^2)^2 + z^2)^(1/4)`` over the trailing axis."""
    p = np.asarray(p, dtype=float)
    h2 = np.sum(p[..., :-1] ** 2, axis=-1)
    return np.sqrt(np.sqrt(h2 * h2 + p[..., -1] ** 2))


def norm_distance_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``||p^-1 q||``, the left-invariant homogeneous distance."""
    return homogeneous_norm_array(mul_array(inv_array(p), q))


def embed_horizontal(p: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Coordinate tangent vector at ``p`` of the frame combination ``coeffs``."""
    p = np.asarray(p, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    vertical = 0.5 * symplectic_form(p[..., :-1], coeffs)
    return np.concatenate([coeffs, vertical[..., None]], axis=-1)


def frame_matrix(p: PointLike) -> np.ndarray:
    """Columns are the coordinate expressions of ``X_1..X_n, Y_1..Y_n`` at ``p``."""
    p = _coords(p)
    n = (p.shape[-1] - 1) // 2
    frame = np.zeros(p.shape[:-1] + (2 * n + 1, 2 * n))
    idx = np.arange(2 * n)
    frame[..., idx, idx] = 1.0
    frame[..., -1, :n] = -0.5 * p[..., n : 2 * n]
    frame[..., -1, n : 2 * n] = 0.5 * p[..., :n]
    return frame


def left_translation_jacobian(p: PointLike) -> np.ndarray:
    """Jacobian of ``q -> p q`` (independent of ``q``); its determinant is 1."""
    p = _coords(p)
    n = (p.shape[-1] - 1) // 2
    jac = np.eye(2 * n + 1)
    jac[-1, :n] = -0.5 * p[n : 2 * n]
    jac[-1, n : 2 * n] = 0.5 * p[:n]
    return jac


def identity(n: int) -> HPoint:
    return HPoint.identity(n)


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    """Product ``p * q``.

    Raises:
        DimensionMismatchError: If the points live in different groups
    """
    check_same_n(p.n, q.n, "group_mul")
    return HPoint(mul_array(p.coords, q.coords))


def group_inv(p: HPoint) -> HPoint:
    return HPoint(inv_array(p.coords))


def dilate(lam: float, p: HPoint) -> HPoint:
    """Anisotropic dilation ``(h, z) -> (lam h, lam^2 z)``."""
    return HPoint(dilate_array(lam, p.coords))


def homogeneous_norm(p: HPoint) -> float:
    return float(homogeneous_norm_array(p.coords))


def norm_distance(p: HPoint, q: HPoint) -> float:
    check_same_n(p.n, q.n, "norm_distance")
    return float(norm_distance_array(p.coords, q.coords))
