"""Operations on sampled horizontal curves and the charges they carry."""

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.models.point import HPoint, PointAtInfinity
from heisenflow.services.calculus_service import horizontal_gradient_array
from heisenflow.services.cayley_service import infinity_image, sphere_image_array
from heisenflow.services.distance_service import DistanceBracket, cc_distance_estimate
from heisenflow.services.group_service import homogeneous_norm_array, norm_distance_array
from heisenflow.utils.config import settings
from heisenflow.utils.exceptions import GridMismatchError, InvalidParameterError
from heisenflow.utils.validators import check_same_n

Region = Callable[[HPoint], bool]
CurveOrInfinity = Union[HorizontalCurve, PointAtInfinity]


def length(curve: HorizontalCurve) -> float:
    """Trapezoidal quadrature of the speed."""
    return float(trapezoid(curve.speeds, dx=curve.dt))


def act(curve: HorizontalCurve, field: HVectorField) -> float:
    """``<[gamma], Phi> = int <Phi(gamma(t)), gamma'(t)> dt`` by the trapezoidal rule."""
    check_same_n(curve.n, field.n, "act")
    integrand = np.sum(field.evaluate(curve.samples) * curve.velocities, axis=1)
    return float(trapezoid(integrand, dx=curve.dt))


def _partition(curve: HorizontalCurve, m: int) -> np.ndarray:
    """Curve points at ``t_k = k l / m``; subsampled when ``m`` divides the grid."""
    if m < 1:
        raise InvalidParameterError(f"partition count must be positive, got {m}")
    if curve.steps % m == 0:
        return curve.samples[:: curve.steps // m]
    points, _ = curve.interpolate(np.linspace(0.0, curve.horizon, m + 1))
    return points


def riemann_sum(curve: HorizontalCurve, field: HVectorField, m: int) -> float:
    """``S_m = sum_k <Phi(gamma(t_k)), h(t_k) - h(t_{k-1})>`` over ``k = 1..m``.

    Left translation preserves frame coefficients, so increments of the
    horizontal coordinates are the transported increments.
    """
    check_same_n(curve.n, field.n, "riemann_sum")
    points = _partition(curve, m)
    increments = np.diff(points[:, :-1], axis=0)
    values = field.evaluate(points[1:])
    return float(np.sum(values * increments))


def polygonal_length(curve: HorizontalCurve, m: int) -> float:
    """``L_m = sum_k |h(t_k) - h(t_{k-1})|``."""
    points = _partition(curve, m)
    return float(np.sum(np.linalg.norm(np.diff(points[:, :-1], axis=0), axis=1)))


def riemann_sum_continuity_bound(
    m: int, sup_field: float, delta: float, modulus: float, polygonal: float
) -> float:
    """Bound ``2 m M delta + omega(delta) L_m`` on ``|S_m(gamma) - S_m(eta)|``.

    Args:
        m: Partition count
        sup_field: ``M``, the sup of ``|Phi|`` on the visited set
        delta: ``d_infinity(gamma, eta)``
        modulus: ``omega(delta)`` for a modulus of continuity of ``Phi``
        polygonal: ``L_m(eta)``
    """
    return 2.0 * m * sup_field * delta + modulus * polygonal


def _trapezoid_weights(curve: HorizontalCurve) -> np.ndarray:
    weights = np.full(curve.steps + 1, curve.dt)
    weights[0] = weights[-1] = 0.5 * curve.dt
    return weights


def variation(curve: HorizontalCurve, region: Optional[Region] = None) -> float:
    """``int_{t : gamma(t) in region} |gamma'(t)| dt``, membership decided at samples."""
    weights = _trapezoid_weights(curve)
    if region is not None:
        inside = np.array([bool(region(HPoint(s))) for s in curve.samples])
        weights = np.where(inside, weights, 0.0)
    return float(np.dot(weights, curve.speeds))


def boundary_pairing(curve: HorizontalCurve, psi: ScalarField) -> float:
    """``-<[gamma], grad_H psi>``; approximates ``psi(gamma(0)) - psi(gamma(l))``."""
    check_same_n(curve.n, psi.n, "boundary_pairing")
    gradient = HVectorField(
        func=lambda p: horizontal_gradient_array(psi, p), n=psi.n, name=f"grad {psi.name}"
    )
    return -act(curve, gradient)


def d_infinity(
    first: HorizontalCurve, second: CurveOrInfinity, compactified: bool = False
) -> float:
    """``sup_t ||first(t)^-1 second(t)||``, or the sup of chordal distances of Cayley images.

    ``second`` may be ``INFINITY`` (the constant curve at infinity) when
    ``compactified`` is set.

    Raises:
        GridMismatchError: If the curves differ in horizon or sample count
    """
    if isinstance(second, PointAtInfinity):
        if not compactified:
            raise InvalidParameterError("the curve at infinity needs compactified=True")
        images = sphere_image_array(first.samples)
        return float(np.max(np.linalg.norm(images - infinity_image(first.n), axis=1)))

    check_same_n(first.n, second.n, "d_infinity")
    if first.steps != second.steps or abs(first.horizon - second.horizon) > 1e-12 * first.horizon:
        raise GridMismatchError(
            f"curves on different grids: (l={first.horizon}, M={first.steps}) "
            f"vs (l={second.horizon}, M={second.steps})"
        )
    if compactified:
        gaps = sphere_image_array(first.samples) - sphere_image_array(second.samples)
        return float(np.max(np.linalg.norm(gaps, axis=1)))
    return float(np.max(norm_distance_array(first.samples, second.samples)))


def sup_norm(curve: HorizontalCurve) -> float:
    """``||gamma||_inf = sup_t ||gamma(t)||``."""
    return float(np.max(homogeneous_norm_array(curve.samples)))


def in_k_ell(curve: HorizontalCurve, tolerance: float = settings.SPEED_TOLERANCE) -> bool:
    """Whether every sampled speed is at most ``1 + tolerance``."""
    return curve.max_speed <= 1.0 + tolerance


def step_brackets(curve: HorizontalCurve) -> List[DistanceBracket]:
    """Distance brackets between consecutive samples."""
    points = [HPoint(s) for s in curve.samples]
    return [cc_distance_estimate(a, b) for a, b in zip(points[:-1], points[1:])]


@dataclass(frozen=True)
class CurveCharge:
    """The charge ``[gamma]`` carried by a horizontal curve."""

    curve: HorizontalCurve

    @property
    def length(self) -> float:
        return length(self.curve)

    def pair(self, field: HVectorField) -> float:
        return act(self.curve, field)

    def divergence_pairing(self, psi: ScalarField) -> float:
        """``<div_H [gamma], psi>``, the endpoint difference."""
        return boundary_pairing(self.curve, psi)

    def variation(self, region: Optional[Region] = None) -> float:
        return variation(self.curve, region)


def _stack(measure: CurveMeasure) -> Tuple[np.ndarray, np.ndarray]:
    samples = np.stack([c.samples for c in measure.curves])
    velocities = np.stack([c.velocities for c in measure.curves])
    return samples, velocities


def measure_action(measure: CurveMeasure, field: HVectorField) -> float:
    """``sum_j w_j <[gamma_j], Phi>``, the action of ``int [gamma] d(nu)``."""
    if len(measure) == 0:
        return 0.0
    check_same_n(measure.n, field.n, "measure_action")
    steps = {c.steps for c in measure.curves}
    if len(steps) > 1:
        return float(sum(w * act(c, field) for c, w in measure.entries()))
    samples, velocities = _stack(measure)
    integrand = np.sum(field.evaluate(samples) * velocities, axis=-1)
    per_curve = trapezoid(integrand, dx=measure.horizon / steps.pop(), axis=1)
    return float(np.dot(measure.weights, per_curve))


def measure_variation(measure: CurveMeasure) -> float:
    """``sum_j w_j var([gamma_j])``."""
    return float(sum(w * variation(c) for c, w in measure.entries()))
