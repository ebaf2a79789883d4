"""Schemas of the JSON documents read by the command line.

Documents are validated here so that malformed input is reported with the
offending field before any numerical object is built.
"""

from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.models.fields import HVectorField

DivergenceAtoms = List[Tuple[List[float], float]]


def _check_length(values: Sequence[float], length: int, where: str) -> None:
    if len(values) != length:
        raise ValueError(f"{where} has {len(values)} entries, expected {length}")


class AtomSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    point: List[float]
    vector: List[float]


class DivergenceAtomSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    point: List[float]
    mass: float


class ChargeDocument(BaseModel):
    """A charge file: explicit atoms, or a named preset with parameters.

    ``divergence`` optionally lists the atoms of ``div_H mu`` for the general
    pipeline.
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    n: int = Field(ge=1)
    atoms: List[AtomSchema] = Field(default_factory=list)
    divergence: Optional[List[DivergenceAtomSchema]] = None
    preset: Optional[str] = None
    params: Dict[str, float] = Field(default_factory=dict)

    @field_validator("atoms")
    @classmethod
    def _check_atoms(cls, atoms: List[AtomSchema], info: ValidationInfo) -> List[AtomSchema]:
        n = info.data.get("n")
        if n is None:
            return atoms
        for index, atom in enumerate(atoms):
            _check_length(atom.point, 2 * n + 1, f"atom {index} point")
            _check_length(atom.vector, 2 * n, f"atom {index} vector")
        return atoms

    @field_validator("divergence")
    @classmethod
    def _check_divergence(
        cls, atoms: Optional[List[DivergenceAtomSchema]], info: ValidationInfo
    ) -> Optional[List[DivergenceAtomSchema]]:
        n = info.data.get("n")
        if atoms is None or n is None:
            return atoms
        for index, atom in enumerate(atoms):
            _check_length(atom.point, 2 * n + 1, f"divergence atom {index} point")
        return atoms

    @model_validator(mode="after")
    def _check_source(self) -> "ChargeDocument":
        if self.preset is not None and self.atoms:
            raise ValueError("give either explicit atoms or a preset, not both")
        return self

    def to_charge(self) -> DiscreteCharge:
        if not self.atoms:
            return DiscreteCharge.empty(self.n)
        return DiscreteCharge(
            self.n,
            np.array([atom.point for atom in self.atoms]),
            np.array([atom.vector for atom in self.atoms]),
        )

    def divergence_atoms(self) -> Optional[DivergenceAtoms]:
        if self.divergence is None:
            return None
        return [(atom.point, atom.mass) for atom in self.divergence]


class CurveSchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, populate_by_name=True)

    horizon: float = Field(gt=0, alias="l")
    samples: List[List[float]]
    velocities: List[List[float]]

    @model_validator(mode="after")
    def _check_shapes(self) -> "CurveSchema":
        if len(self.samples) < 2:
            raise ValueError("a curve needs at least two samples")
        width = len(self.samples[0])
        if width < 3 or width % 2 == 0:
            raise ValueError(f"sample length must be 2n+1 with n >= 1, got {width}")
        if len(self.velocities) != len(self.samples):
            raise ValueError(
                f"{len(self.samples)} samples but {len(self.velocities)} velocities"
            )
        for index, sample in enumerate(self.samples):
            _check_length(sample, width, f"sample {index}")
        for index, velocity in enumerate(self.velocities):
            _check_length(velocity, width - 1, f"velocity {index}")
        return self

    @property
    def n(self) -> int:
        return (len(self.samples[0]) - 1) // 2

    def to_curve(self) -> HorizontalCurve:
        return HorizontalCurve(np.array(self.samples), np.array(self.velocities), self.horizon)


class CurveEntrySchema(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    weight: float = Field(gt=0)
    curve: CurveSchema


class CurveMeasureDocument(BaseModel):
    """``curves.json``: weighted curves on a common horizon.

    ``pipeline`` and ``epsilon`` record how the measure was produced so that
    it can be re-verified later.
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, populate_by_name=True)

    horizon: float = Field(gt=0, alias="l")
    entries: List[CurveEntrySchema] = Field(default_factory=list)
    pipeline: Optional[Literal["solenoidal", "general"]] = None
    epsilon: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_entries(self) -> "CurveMeasureDocument":
        if not self.entries:
            return self
        n = self.entries[0].curve.n
        for index, entry in enumerate(self.entries):
            if entry.curve.n != n:
                raise ValueError(f"entry {index} has n={entry.curve.n}, entry 0 has n={n}")
            if abs(entry.curve.horizon - self.horizon) > 1e-12 * self.horizon:
                raise ValueError(
                    f"entry {index} has horizon {entry.curve.horizon}, expected {self.horizon}"
                )
        return self

    @property
    def n(self) -> Optional[int]:
        return self.entries[0].curve.n if self.entries else None

    def to_measure(self) -> CurveMeasure:
        if not self.entries:
            return CurveMeasure.empty(self.horizon)
        curves = tuple(entry.curve.to_curve() for entry in self.entries)
        return CurveMeasure(self.horizon, curves, np.array([e.weight for e in self.entries]))


class FieldTableDocument(BaseModel):
    """An affine horizontal field ``Phi(p) = constant + linear p`` in frame coefficients.

    ``linear`` has ``2n`` rows of ``2n+1`` coefficients; omitted, the field is
    constant.
    """

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    n: int = Field(ge=1)
    constant: List[float]
    linear: Optional[List[List[float]]] = None
    name: str = "table"

    @model_validator(mode="after")
    def _check_table(self) -> "FieldTableDocument":
        _check_length(self.constant, 2 * self.n, "constant")
        if self.linear is not None:
            _check_length(self.linear, 2 * self.n, "linear")
            for index, row in enumerate(self.linear):
                _check_length(row, 2 * self.n + 1, f"linear row {index}")
        return self

    def to_field(self) -> HVectorField:
        constant = np.array(self.constant)
        if self.linear is None:
            bound = float(np.linalg.norm(constant))
            return HVectorField(
                func=lambda p: np.broadcast_to(constant, p.shape[:-1] + constant.shape),
                n=self.n,
                growth_bound=bound,
                sup_norm=bound,
                name=self.name,
            )

        matrix = np.array(self.linear)
        # |z| is quadratic in the norm, so a z column breaks linear growth
        growth = None
        if not np.any(matrix[:, -1]):
            growth = max(float(np.linalg.norm(constant)), float(np.linalg.norm(matrix[:, :-1], 2)))
        return HVectorField(
            func=lambda p: constant + p @ matrix.T,
            n=self.n,
            growth_bound=growth,
            name=self.name,
        )
