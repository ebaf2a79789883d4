"""Value types for heisenflow."""

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.models.point import (
    INFINITY,
    ComplexPoint,
    HorizontalVector,
    HPoint,
    PointAtInfinity,
    SpherePoint,
)
from heisenflow.models.quadrature import SeedQuadrature

__all__ = [
    "INFINITY",
    "ComplexPoint",
    "CurveMeasure",
    "DiscreteCharge",
    "HorizontalCurve",
    "HorizontalVector",
    "HPoint",
    "HVectorField",
    "PointAtInfinity",
    "ScalarField",
    "SeedQuadrature",
    "SpherePoint",
]
