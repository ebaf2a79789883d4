"""Named charges and fields available from the command line."""

import math
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.fields import HVectorField
from heisenflow.models.schemas import ChargeDocument, DivergenceAtoms
from heisenflow.services.group_service import mul_array
from heisenflow.services.mollifier_service import MollifiedCharge, Mollifier
from heisenflow.utils.exceptions import InputError
from heisenflow.utils.validators import require_positive

PresetCharge = Tuple[DiscreteCharge, Optional[DivergenceAtoms]]


def _embed(n: int, x1: np.ndarray, y1: np.ndarray, z: np.ndarray) -> np.ndarray:
    points = np.zeros((x1.shape[0], 2 * n + 1))
    points[:, 0], points[:, n], points[:, -1] = x1, y1, z
    return points


def _frame(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    vectors = np.zeros((a.shape[0], 2 * n))
    vectors[:, 0], vectors[:, n] = a, b
    return vectors


def _translate(points: np.ndarray, center: Optional[np.ndarray]) -> np.ndarray:
    if center is None:
        return points
    return mul_array(np.broadcast_to(center, points.shape), points)


def _circle(
    n: int, radius: float, offset: float, start: float, sense: float, z0: float, count: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint atoms of the horizontal lift of a circle centred at ``(offset, 0)``.

    Along ``h = (offset + r cos t, r sin t)`` the contact form gives
    ``z(t) = z0 + (offset r (sin t - sin t0) + r^2 (t - t0)) / 2``.
    """
    arc = 2.0 * math.pi / count
    t = start + sense * (np.arange(count) + 0.5) * arc
    x1 = offset + radius * np.cos(t)
    y1 = radius * np.sin(t)
    z = z0 + 0.5 * (offset * radius * (np.sin(t) - math.sin(start)) + radius**2 * (t - start))
    weight = radius * arc
    vectors = _frame(n, -sense * np.sin(t) * weight, sense * np.cos(t) * weight)
    return _embed(n, x1, y1, z), vectors


def figure_eight(
    n: int = 1, radius: float = 0.5, spacing: float = 0.02, center: Optional[np.ndarray] = None
) -> DiscreteCharge:
    """Closed horizontal loop through the origin made of two tangent circles.

    The right circle runs counterclockwise and the left one clockwise, so the
    vertical gains cancel and the loop closes. Atoms sit at arc midpoints with
    weight equal to the arc length, which makes the charge solenoidal up to
    quadrature error.
    """
    radius = require_positive(radius, "radius")
    spacing = require_positive(spacing, "spacing")
    count = max(8, int(math.ceil(2.0 * math.pi * radius / spacing)))
    lift = math.pi * radius**2
    right = _circle(n, radius, radius, math.pi, 1.0, 0.0, count)
    left = _circle(n, radius, -radius, 0.0, -1.0, lift, count)
    points = np.concatenate([right[0], left[0]])
    vectors = np.concatenate([right[1], left[1]])
    return DiscreteCharge(n, _translate(points, center), vectors)


def rotational_annulus(
    n: int = 1, inner: float = 0.3, outer: float = 0.6, spacing: float = 0.05
) -> DiscreteCharge:
    """Planar rotation ``(-y1, x1) / r`` on an annulus at ``z = 0``, one atom per grid cell.

    It is divergence free in the Euclidean plane but not horizontally
    solenoidal, which makes it the standard input for the general pipeline.
    """
    inner = require_positive(inner, "inner radius")
    outer = require_positive(outer, "outer radius")
    spacing = require_positive(spacing, "spacing")
    if outer <= inner:
        raise InputError(f"outer radius {outer} must exceed inner radius {inner}")
    axis = np.arange(-outer + 0.5 * spacing, outer, spacing)
    x1, y1 = (a.reshape(-1) for a in np.meshgrid(axis, axis, indexing="ij"))
    r = np.hypot(x1, y1)
    keep = (r >= inner) & (r <= outer)
    x1, y1, r = x1[keep], y1[keep], r[keep]
    cell = spacing * spacing
    vectors = _frame(n, -y1 / r * cell, x1 / r * cell)
    return DiscreteCharge(n, _embed(n, x1, y1, np.zeros_like(x1)), vectors)


def segment(n: int = 1, length: float = 1.0, spacing: float = 0.02) -> PresetCharge:
    """Unit-speed segment along ``X_1`` centred at the origin, with its divergence.

    ``div_H`` of the segment is ``delta_start - delta_end``.
    """
    length = require_positive(length, "length")
    spacing = require_positive(spacing, "spacing")
    count = max(1, int(math.ceil(length / spacing)))
    step = length / count
    x1 = -0.5 * length + (np.arange(count) + 0.5) * step
    zeros = np.zeros(count)
    charge = DiscreteCharge(
        n, _embed(n, x1, zeros, zeros), _frame(n, np.full(count, step), zeros)
    )
    start = np.zeros(2 * n + 1)
    end = np.zeros(2 * n + 1)
    start[0], end[0] = -0.5 * length, 0.5 * length
    return charge, [(start.tolist(), 1.0), (end.tolist(), -1.0)]


CHARGE_PRESETS: Dict[str, Callable[..., object]] = {
    "figure_eight": figure_eight,
    "rotational_annulus": rotational_annulus,
    "segment": segment,
}


def build_charge(name: str, n: int, params: Optional[Dict[str, float]] = None) -> PresetCharge:
    """Expand a named charge preset.

    Raises:
        InputError: For an unknown preset or parameter
    """
    try:
        factory = CHARGE_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(CHARGE_PRESETS))
        raise InputError(
            f"unknown charge preset {name!r} (known: {known})", location="preset"
        ) from None
    try:
        built = factory(n, **(params or {}))
    except TypeError as exc:
        raise InputError(str(exc), location="params") from exc
    if isinstance(built, tuple):
        return built
    return built, None


def resolve_charge(document: ChargeDocument) -> PresetCharge:
    """The charge and optional divergence atoms described by a charge file."""
    if document.preset is None:
        return document.to_charge(), document.divergence_atoms()
    charge, divergence = build_charge(document.preset, document.n, document.params)
    explicit = document.divergence_atoms()
    return charge, explicit if explicit is not None else divergence


def to_document(
    charge: DiscreteCharge, divergence: Optional[DivergenceAtoms] = None
) -> ChargeDocument:
    """Explicit-atom document for a charge."""
    return ChargeDocument.model_validate(
        {
            "n": charge.n,
            "atoms": [
                {"point": p.tolist(), "vector": v.tolist()}
                for p, v in zip(charge.points, charge.vectors)
            ],
            "divergence": (
                None
                if divergence is None
                else [{"point": list(p), "mass": m} for p, m in divergence]
            ),
        }
    )


def rotational_field(n: int) -> HVectorField:
    """``(-y_i, x_i)`` in every coordinate pair; unit speed on the unit cylinder."""

    def func(points: np.ndarray) -> np.ndarray:
        return np.concatenate([-points[..., n : 2 * n], points[..., :n]], axis=-1)

    return HVectorField(func=func, n=n, growth_bound=1.0, name="rotational")


def constant_field(n: int) -> HVectorField:
    """The unit field ``X_1``."""
    direction = np.zeros(2 * n)
    direction[0] = 1.0
    return HVectorField(
        func=lambda p: np.broadcast_to(direction, p.shape[:-1] + (2 * n,)),
        n=n,
        growth_bound=1.0,
        sup_norm=1.0,
        name="constant",
    )


def dipole_field(n: int, epsilon: float) -> HVectorField:
    """Mollified direction field of the segment charge at scale ``epsilon``."""
    charge, _ = segment(n)
    return MollifiedCharge(charge, Mollifier(n, epsilon)).direction_field()


def build_field(name: str, n: int, epsilon: float) -> HVectorField:
    """Expand a named field preset.

    Raises:
        InputError: For an unknown preset
    """
    if name == "rotational":
        return rotational_field(n)
    if name == "constant":
        return constant_field(n)
    if name == "dipole":
        return dipole_field(n, epsilon)
    raise InputError(
        f"unknown field preset {name!r} (known: constant, dipole, rotational)", location="--field"
    )
