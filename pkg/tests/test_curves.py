"""Tests for operations on horizontal curves and curve charges."""

import math

import numpy as np
import pytest

from heisenflow.cli.presets import constant_field
from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.models.fields import ScalarField
from heisenflow.models.point import INFINITY
from heisenflow.services.curve_service import (
    CurveCharge,
    act,
    boundary_pairing,
    d_infinity,
    in_k_ell,
    length,
    measure_action,
    measure_variation,
    polygonal_length,
    riemann_sum,
    riemann_sum_continuity_bound,
    sup_norm,
    variation,
)
from heisenflow.utils.exceptions import (
    DimensionMismatchError,
    GridMismatchError,
    InvalidParameterError,
)


def straight(start, steps=10, horizon=1.0, speed=1.0):
    """Unit X_1 segment from ``start``."""
    t = np.linspace(0.0, horizon, steps + 1)
    horizontal = np.column_stack([start[0] + speed * t, np.full_like(t, start[1])])
    velocities = np.tile([speed, 0.0], (steps + 1, 1))
    return HorizontalCurve.from_horizontal_path(horizontal, velocities, horizon, z0=start[2])


def test_circle_length(circle_curve):
    """Test that the unit circle has length 2 pi."""
    assert length(circle_curve) == pytest.approx(2 * math.pi, rel=1e-6)
    assert circle_curve.end.coords[2] == pytest.approx(math.pi, abs=1e-6)


def test_act_rotation_along_circle(circle_curve, rotation):
    """Test that the circle pairs with its own tangent field to its length."""
    assert act(circle_curve, rotation) == pytest.approx(2 * math.pi, rel=1e-6)
    assert act(circle_curve, constant_field(1)) == pytest.approx(0.0, abs=1e-6)


def test_riemann_sums_converge(circle_curve, rotation):
    """Test that Riemann sums approach the action as partitions refine."""
    exact = act(circle_curve, rotation)
    errors = [abs(riemann_sum(circle_curve, rotation, m) - exact) for m in (8, 16, 32, 64)]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 0.05


def test_riemann_sum_off_grid(circle_curve, rotation):
    """Test partitions that do not divide the sample grid."""
    exact = act(circle_curve, rotation)
    assert riemann_sum(circle_curve, rotation, 100) == pytest.approx(exact, rel=1e-2)
    with pytest.raises(InvalidParameterError):
        riemann_sum(circle_curve, rotation, 0)


def test_polygonal_length(circle_curve):
    """Test that inscribed polygons approach the circle from below."""
    assert polygonal_length(circle_curve, 4) == pytest.approx(4 * math.sqrt(2.0), rel=1e-6)
    assert polygonal_length(circle_curve, 64) < length(circle_curve)


def test_continuity_bound():
    """Test the Riemann-sum continuity bound formula."""
    assert riemann_sum_continuity_bound(4, 2.0, 0.1, 0.5, 3.0) == pytest.approx(3.1)


def test_riemann_sum_difference_within_bound(rotation):
    """Test that nearby segments differ by less than the continuity bound."""
    first = straight([0.0, 0.0, 0.0])
    second = straight([0.0, 0.01, 0.0])
    delta = d_infinity(first, second)
    m = 8
    gap = abs(riemann_sum(first, rotation, m) - riemann_sum(second, rotation, m))
    bound = riemann_sum_continuity_bound(m, 1.5, delta, delta, polygonal_length(second, m))
    assert gap <= bound


def test_boundary_pairing_is_endpoint_difference(circle_curve):
    """Test -<[gamma], grad psi> = psi(start) - psi(end)."""
    psi = ScalarField(func=lambda p: p[..., 0] + p[..., 1] ** 2 + 0.3 * p[..., 2], n=1)
    quarter = HorizontalCurve(circle_curve.samples[:65], circle_curve.velocities[:65], math.pi / 2)
    expected = psi(quarter.start) - psi(quarter.end)
    assert boundary_pairing(quarter, psi) == pytest.approx(expected, abs=1e-3)
    assert boundary_pairing(circle_curve, psi) == pytest.approx(
        psi(circle_curve.start) - psi(circle_curve.end), abs=1e-3
    )


def test_d_infinity_between_segments():
    """Test the sup distance between translated segments."""
    first = straight([0.0, 0.0, 0.0])
    shifted = straight([0.0, 0.0, 0.04])
    assert d_infinity(first, shifted) == pytest.approx(0.2)
    assert d_infinity(first, first) == 0.0


def test_d_infinity_grid_mismatch():
    """Test that curves on different grids are refused."""
    with pytest.raises(GridMismatchError):
        d_infinity(straight([0.0, 0.0, 0.0], steps=10), straight([0.0, 0.0, 0.0], steps=20))
    with pytest.raises(GridMismatchError):
        d_infinity(straight([0.0, 0.0, 0.0]), straight([0.0, 0.0, 0.0], horizon=2.0))


def test_d_infinity_to_infinity():
    """Test the compactified distance to the curve at infinity."""
    near = straight([0.0, 0.0, 0.0])
    far = straight([1e4, 0.0, 0.0])
    with pytest.raises(InvalidParameterError):
        d_infinity(near, INFINITY)
    assert d_infinity(far, INFINITY, compactified=True) < 1e-3
    assert d_infinity(near, INFINITY, compactified=True) > 1.0
    assert d_infinity(near, near, compactified=True) == 0.0


def test_sup_norm_and_speed_class(circle_curve):
    """Test the sup norm and membership in the unit-speed class."""
    assert sup_norm(circle_curve) == pytest.approx((1.0 + math.pi**2) ** 0.25, rel=1e-6)
    assert in_k_ell(circle_curve)
    assert not in_k_ell(straight([0.0, 0.0, 0.0], speed=1.5))


def test_variation_with_region(circle_curve):
    """Test restriction of the variation to the upper half plane."""
    upper = variation(circle_curve, lambda p: p.coords[1] >= 0.0)
    assert variation(circle_curve) == pytest.approx(2 * math.pi, rel=1e-6)
    assert upper == pytest.approx(math.pi, rel=0.05)
    assert upper <= length(circle_curve)


def test_curve_charge(circle_curve, rotation):
    """Test the charge carried by a curve."""
    charge = CurveCharge(circle_curve)
    assert charge.length == pytest.approx(2 * math.pi, rel=1e-6)
    assert charge.pair(rotation) == pytest.approx(charge.length, rel=1e-6)
    assert charge.variation() <= charge.length + 1e-12
    psi = ScalarField(func=lambda p: p[..., 0], n=1)
    assert charge.divergence_pairing(psi) == pytest.approx(0.0, abs=1e-6)


def test_measure_action_and_variation(circle_curve, rotation):
    """Test weighted sums over a curve measure."""
    measure = CurveMeasure.from_entries(2 * math.pi, [(circle_curve, 0.5), (circle_curve, 0.25)])
    assert measure.total == pytest.approx(0.75)
    assert measure_action(measure, rotation) == pytest.approx(0.75 * 2 * math.pi, rel=1e-6)
    assert measure_variation(measure) == pytest.approx(0.75 * 2 * math.pi, rel=1e-6)
    assert measure_action(CurveMeasure.empty(1.0), rotation) == 0.0


def test_measure_rejects_bad_weights(circle_curve):
    """Test that weights must be positive and horizons must agree."""
    with pytest.raises(DimensionMismatchError):
        CurveMeasure.from_entries(2 * math.pi, [(circle_curve, 0.0)])
    with pytest.raises(DimensionMismatchError):
        CurveMeasure.from_entries(1.0, [(circle_curve, 1.0)])


def test_interpolation_stays_on_curve(circle_curve):
    """Test that interpolated points lie on the unit circle at the right height."""
    points, velocities = circle_curve.interpolate([0.3, 1.7, 2 * math.pi])
    np.testing.assert_allclose(np.hypot(points[:, 0], points[:, 1]), 1.0, atol=1e-6)
    np.testing.assert_allclose(points[:, 2], 0.5 * np.array([0.3, 1.7, 2 * math.pi]), atol=1e-6)
    np.testing.assert_allclose(np.linalg.norm(velocities, axis=1), 1.0, atol=1e-6)
    np.testing.assert_allclose(points[-1], circle_curve.end.coords, atol=1e-12)
