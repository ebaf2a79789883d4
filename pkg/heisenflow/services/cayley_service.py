"""Complex model of ℍⁿ and the Cayley map onto the unit sphere of ℂⁿ⁺¹.

The complex model carries the law
``(z, t)(z', t') = (z + z', t + t' + 2 Im <z, conj(z')>)``. It is identified
with the real half convention through ``(x, y, z) -> (x + iy, c z)``; the
scale ``c`` is derived from the two laws at import and checked on a second
pair of points.
"""

from typing import Union

import numpy as np

from heisenflow.models.point import (
    INFINITY,
    ComplexPoint,
    HPoint,
    PointAtInfinity,
    SpherePoint,
)
from heisenflow.services.group_service import mul_array
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import check_same_n

logger = get_logger(__name__)

ComplexOrInfinity = Union[ComplexPoint, PointAtInfinity]


def complex_mul(a: ComplexPoint, b: ComplexPoint) -> ComplexPoint:
    """Product in the complex model."""
    check_same_n(a.n, b.n, "complex_mul")
    twist = 2.0 * float(np.imag(np.sum(a.zc * np.conj(b.zc))))
    return ComplexPoint(a.zc + b.zc, a.t + b.t + twist)


def _derive_complex_scale() -> float:
    # basis pair in H^1: the half convention gives z = 1/2, the complex model t = -2
    real_product = mul_array(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    complex_product = complex_mul(ComplexPoint([1.0], 0.0), ComplexPoint([1.0j], 0.0))
    scale = complex_product.t / real_product[-1]

    p = np.array([0.3, -1.2, 0.7])
    q = np.array([-0.8, 0.5, -0.4])
    lhs = complex_mul(
        ComplexPoint([p[0] + 1j * p[1]], scale * p[2]),
        ComplexPoint([q[0] + 1j * q[1]], scale * q[2]),
    )
    rhs = mul_array(p, q)
    if abs(lhs.t - scale * rhs[-1]) > 1e-12:
        raise RuntimeError(f"complex model scale {scale} is not a homomorphism")
    return float(scale)


COMPLEX_MODEL_SCALE = _derive_complex_scale()


def to_complex_model(p: HPoint) -> ComplexPoint:
    return ComplexPoint(p.x + 1j * p.y, COMPLEX_MODEL_SCALE * p.z)


def from_complex_model(c: ComplexPoint) -> HPoint:
    return HPoint.from_parts(np.real(c.zc), np.imag(c.zc), c.t / COMPLEX_MODEL_SCALE)


def _forward(zc: np.ndarray, t: np.ndarray):
    """Vectorized forward map on arrays ``zc (..., n)`` and ``t (...)``."""
    r2 = np.sum(np.abs(zc) ** 2, axis=-1)
    denominator = t + 1j * (1.0 + r2)
    w = 2.0 * zc / denominator[..., None]
    w0 = (-t + 1j * (1.0 - r2)) / denominator
    return w, w0


def cayley_forward(p: ComplexOrInfinity, n: int = 1) -> SpherePoint:
    """Map a point of the complex model, or the point at infinity, to the sphere.

    Args:
        p: Finite point or ``INFINITY``
        n: Group index used for the image of ``INFINITY``
    """
    if isinstance(p, PointAtInfinity):
        return SpherePoint(np.zeros(n, dtype=complex), -1.0 + 0.0j)
    w, w0 = _forward(p.zc, np.asarray(p.t))
    return SpherePoint(w, complex(w0))


def cayley_inverse(s: SpherePoint) -> ComplexOrInfinity:
    """Inverse of :func:`cayley_forward`; the pole ``(0, -1)`` maps to infinity."""
    shift = 1.0 + s.w0
    if shift == 0:
        return INFINITY
    zeta = 1j * s.w / shift
    zeta0 = 1j * (1.0 - s.w0) / shift
    return ComplexPoint(zeta, float(np.real(zeta0)))


def sphere_image_array(points: np.ndarray) -> np.ndarray:
    """Sphere images ``(w, w0)`` of real points ``(..., 2n+1)`` as complex ``(..., n+1)``."""
    points = np.asarray(points, dtype=float)
    n = (points.shape[-1] - 1) // 2
    zc = points[..., :n] + 1j * points[..., n : 2 * n]
    w, w0 = _forward(zc, COMPLEX_MODEL_SCALE * points[..., -1])
    return np.concatenate([w, w0[..., None]], axis=-1)


def infinity_image(n: int) -> np.ndarray:
    image = np.zeros(n + 1, dtype=complex)
    image[-1] = -1.0
    return image


def chordal_distance(a: SpherePoint, b: SpherePoint) -> float:
    """Euclidean distance between two sphere points in ℂⁿ⁺¹."""
    check_same_n(a.n, b.n, "chordal_distance")
    return float(np.linalg.norm(a.as_vector() - b.as_vector()))
