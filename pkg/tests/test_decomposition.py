"""Tests for the solenoidal decomposition pipeline."""

import numpy as np
import pytest

from heisenflow.cli.presets import rotational_annulus
from heisenflow.models.charge import DiscreteCharge
from heisenflow.services.curve_service import measure_variation
from heisenflow.services.decomposition_service import (
    DecompositionService,
    decompose_solenoidal,
    reconstruction_errors,
    refine_epsilon,
)
from heisenflow.services.dictionary_service import vector_test_dictionary
from heisenflow.services.flow_service import FlowConfig
from heisenflow.utils.config import RunConfig
from heisenflow.utils.exceptions import InvalidParameterError, NotSolenoidalError

from tests.conftest import COARSE


@pytest.fixture
def loop_result(coarse_config, loop_charge):
    """Coarse decomposition of the figure-eight loop."""
    return DecompositionService(coarse_config).run(loop_charge)


def test_mass_identity(loop_result, loop_charge, coarse_config):
    """Test l * total(nu) = var(mu)."""
    measure = loop_result.measure
    assert len(measure) > 0
    assert coarse_config.horizon * measure.total == pytest.approx(loop_charge.variation, rel=1e-9)
    assert loop_result.seed_mass == pytest.approx(loop_charge.variation, rel=1e-9)


def test_curves_are_horizontal_unit_speed(loop_result, coarse_config):
    """Test that every curve obeys the contact rule and the speed bound."""
    for curve in loop_result.measure.curves:
        assert curve.horizon == coarse_config.horizon
        assert curve.max_speed <= 1.0 + 1e-9
        assert np.max(np.abs(curve.contact_residuals())) <= 1e-10


def test_curves_start_at_seeds(loop_result):
    """Test that curve k starts at seed k with weight mass / l."""
    starts = np.stack([curve.samples[0] for curve in loop_result.measure.curves])
    np.testing.assert_array_equal(starts, loop_result.seeds.nodes)
    np.testing.assert_allclose(
        loop_result.measure.weights, loop_result.seeds.masses / loop_result.measure.horizon
    )


def test_summary(loop_result):
    """Test the summary of a run."""
    summary = loop_result.summary()
    assert summary["epsilon"] == 0.2
    assert summary["curves"] == len(loop_result.measure)
    assert summary["divergence_residual"] < 1e-2
    assert 0.0 < summary["variation_estimate"] <= summary["seed_mass"] * (1.0 + 1e-12)


def test_reconstruction_is_close_to_charge(loop_result, loop_charge):
    """Test the weak pairing of the curve measure against the dictionary."""
    fields = vector_test_dictionary(loop_charge)
    targets = [loop_charge.pair(f) for f in fields]
    errors = reconstruction_errors(loop_result.measure, targets, fields, loop_charge.variation)
    assert errors.shape == (10,)
    assert np.all(errors < 0.15)


def test_variation_identity(loop_result):
    """Test that the weighted curve lengths match the variation of the mollified charge."""
    curves = measure_variation(loop_result.measure)
    assert curves == pytest.approx(loop_result.variation_estimate, rel=1e-2)


def test_finer_grid_and_step_reconstruct_better(loop_charge):
    """Test that refining the seed grid and the time step lowers the mollified error."""
    errors = []
    for knobs in ({"grid": 0.1, "dt": 0.1, "local_nodes": 3}, {"grid": 0.05, "dt": 0.025}):
        config = RunConfig.model_validate({**COARSE, **knobs})
        step = DecompositionService(config).refine(loop_charge, [0.2])[0]
        errors.append(step.diagnostics["mollified_error"])
    assert errors[1] < errors[0]


def test_rotational_annulus_is_refused(coarse_config):
    """Test that a non-solenoidal charge is rejected."""
    annulus = rotational_annulus(1, spacing=0.08)
    service = DecompositionService(coarse_config)
    with pytest.raises(NotSolenoidalError) as info:
        service.run(annulus)
    assert info.value.residual > coarse_config.solenoidal_tolerance


def test_empty_charge(coarse_config):
    """Test that the zero charge decomposes into the empty measure."""
    result = DecompositionService(coarse_config).run(DiscreteCharge.empty(1))
    assert len(result.measure) == 0
    assert result.measure.total == 0.0
    assert result.seed_mass == 0.0


def test_decompose_solenoidal(loop_charge):
    """Test the functional entry point."""
    measure = decompose_solenoidal(
        loop_charge, 0.5, 0.2, 0.1, FlowConfig(dt=0.05, t_max=0.5), local_nodes=4
    )
    assert measure.horizon == 0.5
    assert 0.5 * measure.total == pytest.approx(loop_charge.variation, rel=1e-9)


def test_decompose_solenoidal_tolerance_override(single_atom):
    """Test that overrides reach the run configuration."""
    flow = FlowConfig(dt=0.05, t_max=0.5)
    with pytest.raises(NotSolenoidalError):
        decompose_solenoidal(single_atom, 0.5, 0.2, 0.1, flow, local_nodes=4)
    measure = decompose_solenoidal(
        single_atom, 0.5, 0.2, 0.1, flow, local_nodes=4, solenoidal_tolerance=10.0
    )
    assert 0.5 * measure.total == pytest.approx(1.0)


def test_refine_epsilon(loop_charge):
    """Test diagnostics along a decreasing schedule."""
    steps = refine_epsilon(
        loop_charge, 0.5, [0.3, 0.2], grid=0.1, flow=FlowConfig(dt=0.05, t_max=0.5), local_nodes=4
    )
    assert [step.epsilon for step in steps] == [0.3, 0.2]
    for step in steps:
        assert step.diagnostics["mass"] == pytest.approx(loop_charge.variation, rel=1e-9)
        assert step.diagnostics["curves"] == len(step.measure)
        for key in ("reconstruction_error", "mollified_error", "bias"):
            assert np.isfinite(step.diagnostics[key])
            assert step.diagnostics[key] >= 0.0


def test_refine_epsilon_converges(loop_charge):
    """Test that the bias and the reconstruction error shrink along the schedule."""
    steps = refine_epsilon(
        loop_charge,
        0.5,
        [0.3, 0.15],
        flow=FlowConfig(dt=0.05, t_max=0.5),
        grid_ratio=0.5,
        local_nodes=4,
    )
    bias = [step.diagnostics["bias"] for step in steps]
    errors = [step.diagnostics["reconstruction_error"] for step in steps]
    assert bias[1] < bias[0]
    assert errors[1] < errors[0]


@pytest.mark.parametrize("schedule", [[], [0.2, 0.3], [0.2, 0.2]])
def test_refine_rejects_bad_schedule(coarse_config, loop_charge, schedule):
    """Test that schedules must be non-empty and strictly decreasing."""
    with pytest.raises(InvalidParameterError):
        DecompositionService(coarse_config).refine(loop_charge, schedule)
