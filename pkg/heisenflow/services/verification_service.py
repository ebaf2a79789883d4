"""Checks that a curve measure decomposes a charge.

Five checks are reported: the weak pairing against the vector dictionary,
the mass identity ``l total(nu) = var(mu)``, the variation identity, support
confinement, and the fraction of slow samples.
"""

from typing import Any, Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import CurveMeasure
from heisenflow.models.fields import HVectorField
from heisenflow.services.curve_service import measure_action, measure_variation
from heisenflow.services.dictionary_service import pairing_errors, vector_test_dictionary
from heisenflow.services.mollifier_service import (
    AtomIndex,
    MollifiedCharge,
    Mollifier,
    mollified_pairing,
    seed_quadrature,
)
from heisenflow.utils.config import RunConfig, settings
from heisenflow.utils.logger import get_logger

logger = get_logger(__name__)

SLOW_SPEED = 0.99

Pipeline = Literal["solenoidal", "general"]


class VerificationTolerances(BaseModel):
    pairing: float = Field(default_factory=lambda: settings.PAIRING_TOLERANCE, gt=0)
    mass: float = Field(default_factory=lambda: settings.MASS_TOLERANCE, gt=0)
    variation: float = Field(default_factory=lambda: settings.VARIATION_TOLERANCE, gt=0)
    support: float = Field(default_factory=lambda: settings.SUPPORT_TOLERANCE, ge=0)
    slow_fraction: float = Field(default_factory=lambda: settings.SLOW_FRACTION_TOLERANCE, ge=0)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "VerificationTolerances":
        return cls(
            pairing=config.pairing_tolerance,
            mass=config.mass_tolerance,
            variation=config.variation_tolerance,
            support=config.support_tolerance,
            slow_fraction=config.slow_fraction_tolerance,
        )


class CheckResult(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool
    skipped: bool = False
    detail: Dict[str, Any] = Field(default_factory=dict)


class VerificationReport(BaseModel):
    """Outcome of :func:`verify_decomposition`; serializes to ``report.json``."""

    pipeline: Pipeline
    epsilon: float
    horizon: float
    curves: int
    total: float
    passed: bool
    checks: List[CheckResult]

    def check(self, name: str) -> CheckResult:
        for entry in self.checks:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def failing(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed and not c.skipped]


def _result(name: str, value: float, tolerance: float, **detail: Any) -> CheckResult:
    return CheckResult(
        name=name, value=value, tolerance=tolerance, passed=value <= tolerance, detail=detail
    )


def _relative(value: float, reference: float) -> float:
    gap = abs(value - reference)
    return gap / reference if reference > 0 else gap


def _speed_fraction(measure: CurveMeasure, pipeline: Pipeline) -> float:
    """Fraction of samples slower than ``SLOW_SPEED``; general runs skip resting samples."""
    slow = total = 0
    for curve in measure.curves:
        speeds = curve.speeds
        if pipeline == "general":
            speeds = speeds[speeds > 0.0]
        slow += int(np.count_nonzero(speeds < SLOW_SPEED))
        total += int(speeds.size)
    return slow / total if total else 0.0


def _escaped_mass(mu: DiscreteCharge, measure: CurveMeasure, radius: float) -> float:
    """Share of ``nu`` carried by curves with a sample outside the ``radius`` neighbourhood."""
    if mu.is_empty or len(measure) == 0:
        return 0.0
    index = AtomIndex(mu.points, radius)
    escaped = 0.0
    for curve, weight in measure.entries():
        if not np.all(index.within(curve.samples)):
            escaped += weight
    return escaped / measure.total


def verify_decomposition(
    mu: DiscreteCharge,
    measure: CurveMeasure,
    epsilon: float,
    grid: float,
    dictionary: Optional[Sequence[HVectorField]] = None,
    tolerances: Optional[VerificationTolerances] = None,
    pipeline: Pipeline = "solenoidal",
    local_nodes: int = settings.DEFAULT_LOCAL_NODES,
    jitter_seed: Optional[int] = None,
    variation_estimate: Optional[float] = None,
) -> VerificationReport:
    """Check ``measure`` against ``mu``.

    The solenoidal pipeline is compared with ``mu * J_eps`` and the general
    one with ``mu`` itself; the mass identity applies to the solenoidal
    pipeline only. Failed checks are reported, never raised.
    """
    tolerances = tolerances or VerificationTolerances()
    horizon = measure.horizon
    variation = mu.variation
    checks: List[CheckResult] = []

    fields = list(dictionary) if dictionary is not None else vector_test_dictionary(mu)
    if mu.is_empty:
        targets = [0.0] * len(fields)
    elif pipeline == "solenoidal":
        J = Mollifier(mu.n, epsilon)
        targets = [mollified_pairing(mu, J, f, local_nodes, jitter_seed) for f in fields]
    else:
        targets = [mu.pair(f) for f in fields]
    recon = [measure_action(measure, f) for f in fields] if len(measure) else [0.0] * len(fields)
    errors = pairing_errors(targets, recon, fields, variation)
    checks.append(
        _result(
            "pairing",
            max(errors) if errors else 0.0,
            tolerances.pairing,
            errors={f.name: e for f, e in zip(fields, errors)},
        )
    )

    mass = horizon * measure.total
    if pipeline == "solenoidal":
        checks.append(
            _result("mass_identity", _relative(mass, variation), tolerances.mass, mass=mass)
        )
    else:
        checks.append(
            CheckResult(
                name="mass_identity",
                value=0.0,
                tolerance=tolerances.mass,
                passed=True,
                skipped=True,
                detail={"mass": mass},
            )
        )

    if variation_estimate is None:
        variation_estimate = variation
        if pipeline == "solenoidal" and not mu.is_empty:
            engine = MollifiedCharge(mu, Mollifier(mu.n, epsilon))
            seeds = seed_quadrature(engine, grid, local_nodes, jitter_seed)
            variation_estimate = engine.variation_estimate(seeds)
    curve_variation = measure_variation(measure)
    checks.append(
        _result(
            "variation",
            _relative(curve_variation, variation_estimate),
            tolerances.variation,
            curves=curve_variation,
            estimate=variation_estimate,
        )
    )

    checks.append(
        _result(
            "support",
            _escaped_mass(mu, measure, epsilon + grid),
            tolerances.support,
            radius=epsilon + grid,
        )
    )
    checks.append(
        _result(
            "length",
            _speed_fraction(measure, pipeline),
            tolerances.slow_fraction,
            slow_speed=SLOW_SPEED,
        )
    )

    report = VerificationReport(
        pipeline=pipeline,
        epsilon=epsilon,
        horizon=horizon,
        curves=len(measure),
        total=measure.total,
        passed=all(c.passed for c in checks),
        checks=checks,
    )
    if report.passed:
        logger.info(f"Verification passed ({len(checks)} checks)")
    else:
        logger.warning(f"Verification failed: {', '.join(report.failing())}")
    return report
