"""Fixed test dictionaries adapted to the support of a charge.

Both dictionaries use normalized coordinates ``q = delta_{1/s}(c^-1 p)``
where ``c`` is the coordinate mean of the atoms and ``s = 1.5 R`` with ``R``
the largest norm distance from ``c`` to an atom. The layout is versioned by
``DICTIONARY_VERSION`` so verification numbers stay comparable across releases.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.services import DICTIONARY_VERSION
from heisenflow.services.calculus_service import horizontal_gradient_array
from heisenflow.services.group_service import (
    dilate_array,
    homogeneous_norm_array,
    inv_array,
    mul_array,
)
from heisenflow.utils.config import settings
from heisenflow.utils.logger import get_logger

logger = get_logger(__name__)

SUPPORT_MARGIN = 1.5


@dataclass(frozen=True)
class ChargeFrame:
    """Center and scale used to normalize dictionary coordinates."""

    n: int
    center: np.ndarray
    scale: float

    def normalize(self, points: np.ndarray) -> np.ndarray:
        return dilate_array(1.0 / self.scale, mul_array(inv_array(self.center), points))


def charge_frame(mu: DiscreteCharge) -> ChargeFrame:
    """Frame of ``mu``; an empty or single-point charge gets unit scale."""
    if mu.is_empty:
        return ChargeFrame(mu.n, np.zeros(2 * mu.n + 1), 1.0)
    center = np.mean(mu.points, axis=0)
    radius = float(np.max(homogeneous_norm_array(mul_array(inv_array(center), mu.points))))
    scale = SUPPORT_MARGIN * radius if radius > 0 else 1.0
    return ChargeFrame(mu.n, center, scale)


def _quartic(q: np.ndarray) -> np.ndarray:
    h2 = np.sum(q[..., :-1] ** 2, axis=-1)
    return h2 * h2 + q[..., -1] ** 2


def _bump(q: np.ndarray) -> np.ndarray:
    """``e * exp(-1 / (1 - ||q||^4))`` inside the unit ball; peak value 1."""
    s2 = _quartic(q)
    out = np.zeros_like(s2)
    inside = s2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
    return out


def scalar_test_dictionary(
    mu: DiscreteCharge, frame: Optional[ChargeFrame] = None
) -> List[ScalarField]:
    """Six test functions ``exp(-||q||^4) P(q)`` with low-degree monomials ``P``."""
    frame = frame or charge_frame(mu)
    n = frame.n
    x, y, z = 0, n, 2 * n
    monomials: Sequence[tuple[str, Callable[[np.ndarray], np.ndarray]]] = (
        ("1", lambda q: np.ones(q.shape[:-1])),
        ("x1", lambda q: q[..., x]),
        ("y1", lambda q: q[..., y]),
        ("z", lambda q: q[..., z]),
        ("x1*y1", lambda q: q[..., x] * q[..., y]),
        ("x1^2-y1^2", lambda q: q[..., x] ** 2 - q[..., y] ** 2),
    )

    def make(poly: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
        def func(points: np.ndarray) -> np.ndarray:
            q = frame.normalize(points)
            return np.exp(-_quartic(q)) * poly(q)

        return func

    return [ScalarField(func=make(poly), n=n, name=f"gauss*{label}") for label, poly in monomials]


def _bump_field(
    frame: ChargeFrame, offset: np.ndarray, width: float, direction: np.ndarray, name: str
) -> HVectorField:
    def func(points: np.ndarray) -> np.ndarray:
        q = frame.normalize(points)
        local = dilate_array(1.0 / width, mul_array(inv_array(offset), q))
        return _bump(local)[..., None] * direction

    return HVectorField(func=func, n=frame.n, growth_bound=1.0, sup_norm=1.0, name=name)


def _rotational_field(frame: ChargeFrame) -> HVectorField:
    n = frame.n

    def func(points: np.ndarray) -> np.ndarray:
        q = frame.normalize(points)
        values = np.zeros(points.shape[:-1] + (2 * n,))
        weight = _bump(q)
        values[..., 0] = -weight * q[..., n]
        values[..., n] = weight * q[..., 0]
        return values

    return HVectorField(func=func, n=n, growth_bound=1.0, sup_norm=1.0, name="bump*rotation")


def vector_test_dictionary(
    mu: DiscreteCharge, frame: Optional[ChargeFrame] = None
) -> List[HVectorField]:
    """Ten compactly supported horizontal fields with sup norm at most 1.

    Nine are bumps times a constant frame direction: three centered (``X_1``,
    ``Y_1`` and their diagonal), four at horizontal offsets ``+-0.5`` pointing
    tangentially, two at vertical offsets ``+-0.5`` along ``X_1``. The tenth is
    a bump times the rotation ``(-q_y1, q_x1)``.
    """
    frame = frame or charge_frame(mu)
    n = frame.n
    d = 2 * n + 1

    def point(x1: float = 0.0, y1: float = 0.0, z: float = 0.0) -> np.ndarray:
        p = np.zeros(d)
        p[0], p[n], p[-1] = x1, y1, z
        return p

    def direction(a: float, b: float) -> np.ndarray:
        v = np.zeros(2 * n)
        v[0], v[n] = a, b
        return v / np.linalg.norm(v)

    diagonal = 1.0 / math.sqrt(2.0)
    layout = [
        ("X1@0", point(), 1.0, direction(1, 0)),
        ("Y1@0", point(), 1.0, direction(0, 1)),
        ("diag@0", point(), 1.0, direction(diagonal, diagonal)),
        ("Y1@+x", point(x1=0.5), 0.6, direction(0, 1)),
        ("-Y1@-x", point(x1=-0.5), 0.6, direction(0, -1)),
        ("-X1@+y", point(y1=0.5), 0.6, direction(-1, 0)),
        ("X1@-y", point(y1=-0.5), 0.6, direction(1, 0)),
        ("X1@+z", point(z=0.5), 0.6, direction(1, 0)),
        ("X1@-z", point(z=-0.5), 0.6, direction(1, 0)),
    ]
    fields = [_bump_field(frame, offset, width, vec, name) for name, offset, width, vec in layout]
    fields.append(_rotational_field(frame))
    logger.debug(
        f"Vector dictionary v{DICTIONARY_VERSION}: {len(fields)} fields, scale {frame.scale:.4g}"
    )
    return fields


def divergence_residual(
    mu: DiscreteCharge,
    dictionary: Optional[Sequence[ScalarField]] = None,
    h: float = settings.FD_STEP,
) -> float:
    """``max_f |<div_H mu, f>| / (var(mu) max_i |grad_H f(x_i)|)`` over the dictionary."""
    if mu.is_empty:
        return 0.0
    dictionary = scalar_test_dictionary(mu) if dictionary is None else dictionary
    variation = mu.variation
    worst = 0.0
    for f in dictionary:
        gradients = horizontal_gradient_array(f, mu.points, h)
        scale = variation * float(np.max(np.linalg.norm(gradients, axis=1)))
        if scale <= 0.0:
            continue
        worst = max(worst, abs(float(np.sum(gradients * mu.vectors))) / scale)
    return worst


def pairing_errors(
    target: Sequence[float],
    reconstruction: Sequence[float],
    fields: Sequence[HVectorField],
    variation: float,
) -> List[float]:
    """``|target - reconstruction| / (sup|Phi| var)`` per field; zero variation gives raw gaps."""
    errors = []
    for expected, got, field in zip(target, reconstruction, fields):
        scale = (field.sup_norm or 1.0) * variation
        gap = abs(expected - got)
        errors.append(gap / scale if scale > 0 else gap)
    return errors
