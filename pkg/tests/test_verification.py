"""Tests for decomposition verification reports."""

import pytest

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import CurveMeasure
from heisenflow.services.decomposition_service import DecompositionService
from heisenflow.services.dictionary_service import vector_test_dictionary
from heisenflow.services.verification_service import (
    VerificationTolerances,
    verify_decomposition,
)
from heisenflow.utils.config import settings

CHECKS = ["pairing", "mass_identity", "variation", "support", "length"]


@pytest.fixture
def loop_run(coarse_config, loop_charge):
    """Coarse decomposition and the matching tolerances."""
    result = DecompositionService(coarse_config).run(loop_charge)
    return result, VerificationTolerances.from_run_config(coarse_config)


def verify(charge, measure, tolerances, **kwargs):
    return verify_decomposition(
        charge, measure, 0.2, 0.1, tolerances=tolerances, local_nodes=4, **kwargs
    )


def test_own_output_passes(loop_run, loop_charge):
    """Test that a decomposition verifies against its own charge."""
    result, tolerances = loop_run
    report = verify(
        loop_charge, result.measure, tolerances, variation_estimate=result.variation_estimate
    )
    assert [c.name for c in report.checks] == CHECKS
    assert report.check("mass_identity").value <= 1e-9
    assert report.passed
    assert report.failing() == []
    assert report.curves == len(result.measure)


def test_tampered_weights_fail(loop_run, loop_charge):
    """Test that doubling the weights breaks the mass identity."""
    result, tolerances = loop_run
    doubled = result.measure.with_weights(2.0 * result.measure.weights)
    report = verify(loop_charge, doubled, tolerances)
    assert not report.passed
    assert "mass_identity" in report.failing()
    assert report.check("mass_identity").value == pytest.approx(1.0)


def test_general_pipeline_skips_mass_identity(loop_run, loop_charge):
    """Test that the mass identity is not enforced for the general pipeline."""
    result, tolerances = loop_run
    doubled = result.measure.with_weights(2.0 * result.measure.weights)
    report = verify(loop_charge, doubled, tolerances, pipeline="general")
    check = report.check("mass_identity")
    assert check.skipped and check.passed
    assert "mass_identity" not in report.failing()
    assert check.detail["mass"] == pytest.approx(2.0 * loop_charge.variation)


def test_empty_charge_and_measure():
    """Test that the empty decomposition of the zero charge verifies."""
    report = verify_decomposition(DiscreteCharge.empty(1), CurveMeasure.empty(1.0), 0.2, 0.1)
    assert report.passed
    assert report.curves == 0
    assert report.total == 0.0


def test_report_serialization(loop_run, loop_charge):
    """Test the dumped report and check lookup."""
    result, tolerances = loop_run
    report = verify(loop_charge, result.measure, tolerances)
    dumped = report.model_dump()
    assert dumped["pipeline"] == "solenoidal"
    assert [c["name"] for c in dumped["checks"]] == CHECKS
    assert set(dumped["checks"][0]["detail"]["errors"]) == {
        f.name for f in vector_test_dictionary(loop_charge)
    }
    with pytest.raises(KeyError):
        report.check("unknown")


def test_default_tolerances():
    """Test that tolerances default to the settings."""
    tolerances = VerificationTolerances()
    assert tolerances.pairing == settings.PAIRING_TOLERANCE
    assert tolerances.mass == settings.MASS_TOLERANCE
    assert tolerances.slow_fraction == settings.SLOW_FRACTION_TOLERANCE
