"""Tests for frame derivatives, divergence and the contact form."""

import numpy as np
import pytest

from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.models.point import HPoint
from heisenflow.services.calculus_service import (
    check_gradient,
    contact_form,
    frame_derivative,
    horizontal_gradient,
    midpoint_quadrature,
    smooth_divergence,
    weak_divergence,
)
from heisenflow.services.dictionary_service import divergence_residual
from heisenflow.utils.exceptions import DimensionMismatchError, InvalidParameterError


VERTICAL = ScalarField(func=lambda p: p[..., 2], n=1, name="z")


def test_gradient_of_vertical_coordinate():
    """Test X z = -y/2 and Y z = x/2."""
    gradient = horizontal_gradient(VERTICAL, HPoint([2.0, 4.0, 1.0]))
    np.testing.assert_allclose(gradient.coeffs, [-2.0, 1.0], atol=1e-8)


def test_frame_derivative_direction_range():
    """Test that frame directions are 1-based and bounded."""
    p = HPoint([0.0, 0.0, 0.0])
    assert frame_derivative(VERTICAL, 1, p) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(InvalidParameterError):
        frame_derivative(VERTICAL, 3, p)


def test_analytic_gradient_is_used():
    """Test that a supplied gradient agrees with central differences."""
    f = ScalarField(
        func=lambda p: p[..., 0] ** 2,
        n=1,
        gradient=lambda p: np.stack([2.0 * p[..., 0], np.zeros(p.shape[:-1])], axis=-1),
    )
    samples = np.array([[0.5, 1.0, 0.0], [-1.0, 2.0, 3.0]])
    assert check_gradient(f, samples)
    assert horizontal_gradient(f, HPoint([1.5, 0.0, 0.0])).coeffs[0] == 3.0


def test_weak_divergence_of_atom(single_atom):
    """Test <div mu, x1> = -1 for a unit X_1 atom."""
    f = ScalarField(func=lambda p: p[..., 0], n=1)
    assert weak_divergence(single_atom, f) == pytest.approx(-1.0)


def test_closed_loop_is_solenoidal(loop_charge):
    """Test that the figure-eight passes the divergence test."""
    assert divergence_residual(loop_charge) < 1e-2


def test_single_atom_is_not_solenoidal(single_atom):
    """Test that an isolated atom fails the divergence test."""
    assert divergence_residual(single_atom) > 1e-1


def test_smooth_divergence():
    """Test the divergence of the rotation and of the radial field."""
    rotation = HVectorField(func=lambda p: np.stack([-p[..., 1], p[..., 0]], axis=-1), n=1)
    radial = HVectorField(func=lambda p: p[..., :2], n=1)
    p = HPoint([0.3, -0.7, 2.0])
    assert smooth_divergence(rotation, p) == pytest.approx(0.0, abs=1e-8)
    assert smooth_divergence(radial, p) == pytest.approx(2.0, abs=1e-8)


def test_contact_form():
    """Test that frame vectors are in the kernel and d/dz is not."""
    p = HPoint([2.0, 4.0, 1.0])
    assert contact_form(p, [1.0, 0.0, -2.0]) == pytest.approx(0.0)
    assert contact_form(p, [0.0, 1.0, 1.0]) == pytest.approx(0.0)
    assert contact_form(p, [0.0, 0.0, 1.0]) == 1.0
    with pytest.raises(DimensionMismatchError):
        contact_form(p, [1.0, 0.0])


def test_midpoint_quadrature_box_volume():
    """Test the midpoint rule on a polynomial."""
    value = midpoint_quadrature(
        lambda q: q[:, 0] ** 2, [0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [50, 4, 4]
    )
    assert value == pytest.approx(2.0, rel=1e-3)
