"""Tests for Carnot-Caratheodory distance brackets."""

import math

import pytest

from heisenflow.models.point import HPoint
from heisenflow.services.distance_service import (
    bilipschitz_constants,
    cc_distance_estimate,
    norm_bracket,
)
from heisenflow.services.group_service import group_mul, homogeneous_norm


ORIGIN = HPoint([0.0, 0.0, 0.0])


def test_vertical_distance():
    """Test d(0, (0,0,1)) = 2 sqrt(pi)."""
    bracket = cc_distance_estimate(ORIGIN, HPoint([0.0, 0.0, 1.0]))
    expected = 2.0 * math.sqrt(math.pi)
    assert bracket.contains(expected, slack=1e-12)
    assert bracket.width <= 0.02 * expected


def test_horizontal_distance():
    """Test that horizontal displacements are at their chord length."""
    bracket = cc_distance_estimate(ORIGIN, HPoint([3.0, 4.0, 0.0]))
    assert bracket.lower == pytest.approx(5.0)
    assert bracket.upper == pytest.approx(5.0)


def test_half_circle_distance():
    """Test the semicircle over a unit chord: area pi/8, length pi/2."""
    bracket = cc_distance_estimate(ORIGIN, HPoint([1.0, 0.0, math.pi / 8.0]))
    assert bracket.converged
    assert bracket.contains(math.pi / 2.0, slack=1e-6)
    assert bracket.width < 1e-6


def test_distance_is_left_invariant():
    """Test that translating both points keeps the bracket."""
    p, q = HPoint([0.2, -0.1, 0.3]), HPoint([1.0, 0.5, -0.4])
    g = HPoint([5.0, 2.0, -1.0])
    first = cc_distance_estimate(p, q)
    second = cc_distance_estimate(group_mul(g, p), group_mul(g, q))
    assert first.lower == pytest.approx(second.lower, rel=1e-6)
    assert first.upper == pytest.approx(second.upper, rel=1e-6)


def test_identical_points():
    """Test the zero distance."""
    bracket = cc_distance_estimate(ORIGIN, ORIGIN)
    assert bracket.lower == bracket.upper == 0.0


def test_norm_bracket_in_higher_dimension():
    """Test that n > 1 falls back to the norm bracket."""
    p = HPoint([0.0] * 5)
    q = HPoint([1.0, 0.0, 0.0, 1.0, 2.0])
    bracket = cc_distance_estimate(p, q)
    assert bracket == norm_bracket(p, q)
    assert 0.0 < bracket.lower <= bracket.upper


def test_bilipschitz_constants_bound_the_norm():
    """Test that the norm of the vertical unit lies between the constants times d_CC."""
    constants = bilipschitz_constants()
    assert 0.0 < constants.lower_ratio < constants.upper_ratio
    target = HPoint([0.0, 0.0, 1.0])
    ratio = homogeneous_norm(target) / (2.0 * math.sqrt(math.pi))
    assert constants.lower_ratio <= ratio <= constants.upper_ratio
