"""Tests for input documents, presets and deterministic output files."""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from heisenflow.cli.presets import build_charge, build_field, resolve_charge
from heisenflow.models.curve import CurveMeasure
from heisenflow.models.point import INFINITY, HPoint
from heisenflow.models.schemas import ChargeDocument, CurveMeasureDocument, FieldTableDocument
from heisenflow.scripts.seed_fixtures import PRESET_FIXTURES, seed_fixtures
from heisenflow.services.export_service import (
    ExportService,
    curves_csv,
    decode_point,
    encode_point,
    load_charge_document,
    load_measure,
    measure_to_dict,
    trajectories_csv,
)
from heisenflow.utils.exceptions import InputError
from heisenflow.utils.formatters import dumps, format_duration, format_float

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def curve_entry(horizon):
    return {
        "weight": 1.0,
        "curve": {
            "l": horizon,
            "samples": [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0]],
            "velocities": [[1.0, 0.0], [1.0, 0.0]],
        },
    }


def test_charge_document_atoms():
    """Test explicit atoms and their conversion."""
    document = ChargeDocument.model_validate(
        {"n": 1, "atoms": [{"point": [0.0, 0.0, 0.0], "vector": [0.0, 2.0]}]}
    )
    charge = document.to_charge()
    assert len(charge) == 1
    assert charge.variation == 2.0
    assert document.divergence_atoms() is None


@pytest.mark.parametrize(
    "payload",
    [
        {"n": 1, "atoms": [{"point": [0.0, 0.0], "vector": [1.0, 0.0]}]},
        {"n": 1, "atoms": [{"point": [0.0, 0.0, 0.0], "vector": [1.0]}]},
        {"n": 1, "divergence": [{"point": [0.0], "mass": 1.0}]},
        {"n": 1, "preset": "segment", "atoms": [{"point": [0, 0, 0], "vector": [1, 0]}]},
        {"n": 0},
        {"n": 1, "colour": "blue"},
    ],
)
def test_charge_document_rejects(payload):
    """Test malformed charge documents."""
    with pytest.raises(ValidationError):
        ChargeDocument.model_validate(payload)


def test_resolve_preset_charge():
    """Test that presets expand with their divergence atoms."""
    document = ChargeDocument.model_validate(
        {"n": 1, "preset": "segment", "params": {"spacing": 0.25}}
    )
    charge, divergence = resolve_charge(document)
    assert len(charge) == 4
    assert charge.variation == pytest.approx(1.0)
    assert [mass for _, mass in divergence] == [1.0, -1.0]


def test_build_charge_errors():
    """Test unknown presets and parameters."""
    with pytest.raises(InputError) as info:
        build_charge("spiral", 1)
    assert info.value.location == "preset"
    with pytest.raises(InputError) as info:
        build_charge("segment", 1, {"width": 2.0})
    assert info.value.location == "params"


def test_figure_eight_is_closed():
    """Test that the loop preset has vanishing total vector."""
    charge, divergence = build_charge("figure_eight", 2, {"spacing": 0.05})
    assert divergence is None
    assert charge.n == 2
    np.testing.assert_allclose(charge.vectors.sum(axis=0), 0.0, atol=1e-12)


def test_build_field():
    """Test field presets by name."""
    field = build_field("rotational", 1, 0.1)
    np.testing.assert_allclose(field.evaluate([1.0, 0.0, 0.0]), [0.0, 1.0])
    assert build_field("constant", 2, 0.1).sup_norm == 1.0
    with pytest.raises(InputError):
        build_field("spiral", 1, 0.1)


def test_field_table_constant():
    """Test that a constant table is bounded by its norm."""
    field = FieldTableDocument.model_validate({"n": 1, "constant": [0.6, 0.8]}).to_field()
    assert field.growth_bound == pytest.approx(1.0)
    assert field.sup_norm == pytest.approx(1.0)
    np.testing.assert_allclose(field.evaluate(np.zeros((3, 3))), [[0.6, 0.8]] * 3)


def test_field_table_affine():
    """Test growth bounds of affine tables."""
    rotation = FieldTableDocument.model_validate(
        {"n": 1, "constant": [0.0, 0.0], "linear": [[0, -1, 0], [1, 0, 0]]}
    ).to_field()
    assert rotation.growth_bound == pytest.approx(1.0)
    np.testing.assert_allclose(rotation.evaluate([1.0, 0.0, 5.0]), [0.0, 1.0])

    vertical = FieldTableDocument.model_validate(
        {"n": 1, "constant": [0.0, 0.0], "linear": [[0, 0, 1], [0, 0, 0]]}
    ).to_field()
    assert vertical.growth_bound is None


def test_field_table_rejects_shapes():
    """Test coefficient lengths of a field table."""
    with pytest.raises(ValidationError):
        FieldTableDocument.model_validate({"n": 1, "constant": [0.0, 0.0, 0.0]})
    with pytest.raises(ValidationError):
        FieldTableDocument.model_validate(
            {"n": 1, "constant": [0.0, 0.0], "linear": [[0, 0], [0, 0]]}
        )


def test_measure_document():
    """Test reading a curve measure document."""
    document = CurveMeasureDocument.model_validate(
        {"l": 0.5, "entries": [curve_entry(0.5)], "pipeline": "solenoidal", "epsilon": 0.1}
    )
    assert document.n == 1
    measure = document.to_measure()
    assert len(measure) == 1
    assert measure.horizon == 0.5

    empty = CurveMeasureDocument.model_validate({"l": 1.0})
    assert empty.n is None
    assert len(empty.to_measure()) == 0


@pytest.mark.parametrize(
    "payload",
    [
        {"l": 1.0, "entries": [curve_entry(0.5)]},
        {"l": 0.5, "entries": [curve_entry(0.5)], "pipeline": "other"},
        {"l": 0.5, "entries": [{**curve_entry(0.5), "weight": 0.0}]},
    ],
)
def test_measure_document_rejects(payload):
    """Test inconsistent curve measure documents."""
    with pytest.raises(ValidationError):
        CurveMeasureDocument.model_validate(payload)


def test_point_tokens():
    """Test the JSON form of points."""
    assert encode_point(INFINITY) == "inf"
    assert decode_point("inf") is INFINITY
    assert encode_point(HPoint([1.0, 2.0, 3.0])) == [1.0, 2.0, 3.0]
    assert decode_point([1.0, 2.0, 3.0]) == HPoint([1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        decode_point("nan")


def test_format_float():
    """Test 17 significant digits and non-finite refusal."""
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(2.0) == "2"
    assert float(format_float(math.pi)) == math.pi
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_dumps():
    """Test compact deterministic JSON."""
    payload = {"b": [1, 0.5, True, None], "a": np.array([1.0, 2.5]), "s": "x"}
    assert dumps(payload) == '{"b":[1,0.5,true,null],"a":[1,2.5],"s":"x"}'
    with pytest.raises(ValueError):
        dumps({"bad": float("inf")})
    with pytest.raises(TypeError):
        dumps({"bad": object()})


def test_format_duration():
    """Test human readable durations."""
    assert format_duration(0.25) == "250ms"
    assert format_duration(5.0) == "5.0s"
    assert format_duration(125.0) == "2m5s"


def test_csv_headers():
    """Test the CSV layout for empty inputs."""
    assert curves_csv(CurveMeasure.empty(1.0)) == "curve,weight,t,x1,y1,z\n"
    assert trajectories_csv([]) == "seed,t,x1,y1,z\n"


def test_measure_file_roundtrip(tmp_path):
    """Test writing and reading curves.json."""
    measure = CurveMeasureDocument.model_validate(
        {"l": 0.5, "entries": [curve_entry(0.5)]}
    ).to_measure()
    export = ExportService(tmp_path / "out")
    path = export.write_json("curves.json", measure_to_dict(measure, "general", 0.2))
    loaded, document = load_measure(path)
    assert document.pipeline == "general"
    assert document.epsilon == 0.2
    np.testing.assert_array_equal(loaded.curves[0].samples, measure.curves[0].samples)

    rows = curves_csv(measure).splitlines()
    assert rows[1] == "0,1,0,0,0,0"
    assert len(rows) == 3


def test_load_charge_document_errors(tmp_path):
    """Test that schema errors name the offending field."""
    path = tmp_path / "charge.json"
    path.write_text(json.dumps({"n": 1, "atoms": [{"point": [0, 0, 0], "vector": [1]}]}))
    with pytest.raises(InputError) as info:
        load_charge_document(path)
    assert info.value.location == "atoms"


def test_seed_fixtures(tmp_path):
    """Test that preset fixtures expand to explicit-atom files."""
    written = seed_fixtures(FIXTURES, tmp_path)
    assert [p.name for p in written] == list(PRESET_FIXTURES)
    for path in written:
        document = load_charge_document(path)
        assert document.preset is None
        assert len(document.atoms) > 0
    segment = load_charge_document(tmp_path / "segment.json")
    assert [atom.mass for atom in segment.divergence] == [1.0, -1.0]
