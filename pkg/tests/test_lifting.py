"""Tests for the lift to the next Heisenberg group and the general pipeline."""

import numpy as np
import pytest

from heisenflow.cli.presets import constant_field, figure_eight, segment
from heisenflow.models.curve import HorizontalCurve
from heisenflow.models.point import HPoint
from heisenflow.services.curve_service import measure_action
from heisenflow.services.decomposition_service import (
    DecompositionService,
    reconstruction_errors,
)
from heisenflow.services.dictionary_service import vector_test_dictionary
from heisenflow.services.lifting_service import (
    LiftingService,
    embed_points,
    embed_vectors,
    extract_divergence_atoms,
    lift_charge,
    lifted_divergence_residual,
    plane_contact,
    project_curve,
    project_points,
    project_vectors,
    restrict_to_height,
)
from heisenflow.utils.config import RunConfig
from heisenflow.utils.exceptions import DimensionMismatchError, NoPlaneContactError

from tests.conftest import COARSE


def descending_curve():
    """Curve in the second group that drops to the base plane at t = 0.5 and moves along X_1."""
    t = np.linspace(0.0, 1.0, 11)
    horizontal = np.zeros((11, 4))
    horizontal[:, 0] = 0.5 * t
    horizontal[:, 1] = np.maximum(0.0, 0.5 - t)
    velocities = np.zeros((11, 4))
    velocities[:, 0] = 0.5
    velocities[:5, 1] = -1.0
    return HorizontalCurve.from_horizontal_path(horizontal, velocities, 1.0)


def test_embed_and_project(random_points, rng):
    """Test that projection undoes the embedding."""
    lifted = embed_points(random_points, 0.7)
    assert lifted.shape == (50, 5)
    np.testing.assert_array_equal(lifted[:, 1], 0.7)
    np.testing.assert_array_equal(lifted[:, 3], 0.0)
    np.testing.assert_array_equal(project_points(lifted), random_points)
    vectors = rng.normal(size=(50, 2))
    np.testing.assert_array_equal(project_vectors(embed_vectors(vectors)), vectors)


def test_lift_is_solenoidal():
    """Test that a finely sampled segment lifts to a divergence-free charge."""
    charge, divergence = segment(1, length=1.0, spacing=0.005)
    lifted = lift_charge(charge, divergence, 2.0, segment_count=400)
    assert lifted.n == 2
    assert len(lifted.charge) == 2 * len(charge) + 2 * 400
    assert lifted.divergence_mass == pytest.approx(2.0)
    assert lifted_divergence_residual(lifted) < 1e-4


def test_restrict_to_height(dipole):
    """Test that the base slice is the charge and the top slice its negative."""
    charge, divergence = dipole
    lifted = lift_charge(charge, divergence, 2.0, segment_count=8)
    bottom = restrict_to_height(lifted, 0.0)
    np.testing.assert_array_equal(bottom.points, charge.points)
    np.testing.assert_array_equal(bottom.vectors, charge.vectors)
    top = restrict_to_height(lifted, 2.0)
    np.testing.assert_array_equal(top.vectors, -charge.vectors)


def test_lift_rejects_wrong_divergence_point(dipole):
    """Test that divergence points must live in the base group."""
    charge, _ = dipole
    with pytest.raises(DimensionMismatchError):
        lift_charge(charge, [([0.0, 0.0], 1.0)], 1.0)


def test_extract_divergence_atoms():
    """Test that extracted masses balance and sit at the segment ends."""
    charge, _ = segment(1, length=1.0, spacing=0.02)
    atoms = extract_divergence_atoms(charge, 0.1)
    centers = np.stack([c for c, _ in atoms])
    masses = np.array([m for _, m in atoms])
    assert masses.sum() == pytest.approx(0.0, abs=1e-9)
    positive, negative = masses > 0, masses < 0
    assert masses[positive].sum() == pytest.approx(1.0, abs=0.05)
    assert np.average(centers[positive, 0], weights=masses[positive]) == pytest.approx(
        -0.5, abs=0.1
    )
    assert np.average(centers[negative, 0], weights=-masses[negative]) == pytest.approx(
        0.5, abs=0.1
    )


def test_extract_divergence_of_closed_loop():
    """Test that a finely sampled closed loop has almost no extracted divergence."""
    loop = figure_eight(1, radius=0.5, spacing=0.01)
    atoms = extract_divergence_atoms(loop, 0.2)
    total = sum(abs(m) for _, m in atoms)
    assert total < 0.1 * loop.variation


def test_plane_contact():
    """Test the first and last contact of a descending curve."""
    curve = descending_curve()
    assert plane_contact(curve, 1, 0.15, 0.9) == (5, 10)
    resting = HorizontalCurve.constant(HPoint([0.0, 1.0, 0.0, 0.0, 0.0]), 1.0, 4)
    with pytest.raises(NoPlaneContactError):
        plane_contact(resting, 1, 0.15, 0.9)


def test_project_curve():
    """Test the clipped projection: rest before contact, horizontal throughout."""
    projected = project_curve(descending_curve(), 5, 10)
    assert projected.n == 1
    np.testing.assert_array_equal(projected.samples[0], projected.samples[5])
    np.testing.assert_array_equal(projected.velocities[:5], 0.0)
    assert np.max(np.abs(projected.contact_residuals())) <= 1e-12
    assert projected.samples[-1, 0] == pytest.approx(0.5)


def test_general_pipeline_on_segment(dipole):
    """Test the lifted decomposition of an open segment."""
    charge, divergence = dipole
    config = RunConfig.model_validate({**COARSE, "l": 2.0, "local_nodes": 3})
    result = LiftingService(config).run(charge, divergence)
    assert result.kept > 0
    assert result.measure.n == 1
    assert result.kept + result.dropped == len(result.lifted_result.measure)
    assert result.kept_mass + result.dropped_mass == pytest.approx(
        result.lifted_result.measure.total, rel=1e-9
    )
    assert measure_action(result.measure, constant_field(1)) == pytest.approx(1.0, abs=0.25)
    for curve in result.measure.curves:
        assert np.max(np.abs(curve.contact_residuals())) <= 1e-10
    summary = result.summary()
    assert summary["divergence_mass"] == pytest.approx(2.0)
    assert 0.0 <= summary["mean_clipped_duration"] <= 2.0


def test_general_pipeline_reconstructs_segment():
    """Test the X_1 pairing and the clipped durations of a finer segment run.

    The lift circulates along a rectangle of perimeter 2 l + 2 at unit speed.
    Curves of duration l = 2 that meet the base segment spend on average 2/3
    of their time on it, so the mean clipped duration is 4/3.
    """
    charge, divergence = segment(1, length=1.0, spacing=0.05)
    config = RunConfig.model_validate(
        {**COARSE, "l": 2.0, "epsilon": 0.15, "grid": 0.075, "local_nodes": 3}
    )
    result = LiftingService(config).run(charge, divergence)
    assert measure_action(result.measure, constant_field(1)) == pytest.approx(1.0, abs=0.1)
    fields = vector_test_dictionary(charge)
    targets = [charge.pair(f) for f in fields]
    errors = reconstruction_errors(result.measure, targets, fields, charge.variation)
    assert np.max(errors) < 0.1
    assert result.mean_clipped_duration == pytest.approx(4.0 / 3.0, abs=0.2)


def test_general_pipeline_agrees_with_direct_on_closed_loop():
    """Test that a solenoidal charge decomposes about as well through its lift."""
    loop = figure_eight(1, radius=0.5, spacing=0.08)
    config = RunConfig.model_validate({**COARSE, "local_nodes": 3})
    fields = vector_test_dictionary(loop)
    targets = [loop.pair(f) for f in fields]

    general = LiftingService(config).run(loop, [])
    assert general.kept > 0
    assert general.kept_mass == pytest.approx(0.5 * general.lifted_result.measure.total, rel=0.05)
    direct = DecompositionService(config).run(loop).measure
    lifted_errors = reconstruction_errors(general.measure, targets, fields, loop.variation)
    direct_errors = reconstruction_errors(direct, targets, fields, loop.variation)
    assert np.max(lifted_errors) <= 2.0 * np.max(direct_errors) + 0.02


def test_default_divergence_spacing(dipole):
    """Test that divergence atoms are extracted on a 2 eps grid unless configured."""
    charge, _ = dipole
    config = RunConfig.model_validate({**COARSE, "l": 0.5, "local_nodes": 3})
    service = LiftingService(config)
    assert service.divergence_spacing == pytest.approx(0.4)
    configured = RunConfig.model_validate({**COARSE, "divergence_grid": 0.15})
    assert LiftingService(configured).divergence_spacing == 0.15

    result = service.run(charge)
    expected = extract_divergence_atoms(charge, 0.4)
    centers = np.stack([c for c, _ in expected])
    np.testing.assert_array_equal(result.lifted.divergence_points, centers)
    np.testing.assert_array_equal(result.lifted.divergence_masses, [m for _, m in expected])
