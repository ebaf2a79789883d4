"""Loading inputs and writing run artifacts.

Every number is written with 17 significant digits and keys keep a fixed
order, so identical runs produce byte-identical files.
"""

import csv
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.models.point import INFINITY, HPoint, PointOrInfinity
from heisenflow.models.schemas import ChargeDocument, CurveMeasureDocument, FieldTableDocument
from heisenflow.utils.exceptions import HeisenflowError, InputError
from heisenflow.utils.formatters import dumps, format_float
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import validate_json_file

logger = get_logger(__name__)

PathLike = Union[str, Path]

INFINITY_TOKEN = "inf"


def encode_point(point: PointOrInfinity) -> Union[str, List[float]]:
    """JSON form of a point: its coordinates, or ``"inf"`` for the point at infinity."""
    if point is INFINITY:
        return INFINITY_TOKEN
    return point.to_list()


def decode_point(value: Union[str, Sequence[float]]) -> PointOrInfinity:
    if isinstance(value, str):
        if value != INFINITY_TOKEN:
            raise InputError(f"unknown point token {value!r}")
        return INFINITY
    return HPoint(list(value))


def load_charge_document(path: PathLike) -> ChargeDocument:
    return validate_json_file(path, ChargeDocument, "charge")


def load_measure(path: PathLike) -> Tuple[CurveMeasure, CurveMeasureDocument]:
    """Read ``curves.json``; the document keeps the optional pipeline metadata.

    Raises:
        InputError: On malformed JSON, schema violations, or invalid curves
    """
    document = validate_json_file(path, CurveMeasureDocument, "curve measure")
    try:
        measure = document.to_measure()
    except HeisenflowError as exc:
        raise InputError(str(exc), path=str(path)) from exc
    logger.info(f"Loaded {len(measure)} curves from {path}")
    return measure, document


def load_field_table(path: PathLike) -> FieldTableDocument:
    return validate_json_file(path, FieldTableDocument, "field table")


def charge_to_dict(document: ChargeDocument) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "n": document.n,
        "atoms": [{"point": a.point, "vector": a.vector} for a in document.atoms],
    }
    if document.divergence is not None:
        payload["divergence"] = [{"point": a.point, "mass": a.mass} for a in document.divergence]
    return payload


def measure_to_dict(
    measure: CurveMeasure, pipeline: Optional[str] = None, epsilon: Optional[float] = None
) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "l": measure.horizon,
        "entries": [{"weight": w, "curve": c.to_dict()} for c, w in measure.entries()],
    }
    if pipeline is not None:
        payload["pipeline"] = pipeline
    if epsilon is not None:
        payload["epsilon"] = epsilon
    return payload


def _coordinate_header(n: int) -> List[str]:
    return [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)] + ["z"]


def _curve_rows(label: str, curve: HorizontalCurve, *prefix: float) -> List[List[str]]:
    rows = []
    for t, sample in zip(curve.times, curve.samples):
        row = [label] + [format_float(v) for v in prefix] + [format_float(t)]
        rows.append(row + [format_float(c) for c in sample])
    return rows


def curves_csv(measure: CurveMeasure) -> str:
    """``curve,weight,t,x1..xn,y1..yn,z``, one row per sample."""
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    n = measure.n or 1
    writer.writerow(["curve", "weight", "t"] + _coordinate_header(n))
    for index, (curve, weight) in enumerate(measure.entries()):
        writer.writerows(_curve_rows(str(index), curve, weight))
    return output.getvalue()


def trajectories_csv(trajectories: Sequence[HorizontalCurve]) -> str:
    """``seed,t,x1..xn,y1..yn,z``, one row per sample."""
    output = StringIO()
    writer = csv.writer(output, lineterminator="\n")
    n = trajectories[0].n if trajectories else 1
    writer.writerow(["seed", "t"] + _coordinate_header(n))
    for index, curve in enumerate(trajectories):
        writer.writerows(_curve_rows(str(index), curve))
    return output.getvalue()


class ExportService:
    """Writes the artifacts of one run into an output directory."""

    def __init__(self, out_dir: PathLike):
        self.out_dir = Path(out_dir)

    def _write(self, name: str, text: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(text)
        logger.debug(f"Wrote {path}")
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        return self._write(name, dumps(payload) + "\n")

    def export_measure(
        self,
        measure: CurveMeasure,
        pipeline: Optional[str] = None,
        epsilon: Optional[float] = None,
    ) -> Tuple[Path, Path]:
        """Write ``curves.json`` and ``curves.csv``."""
        json_path = self.write_json("curves.json", measure_to_dict(measure, pipeline, epsilon))
        csv_path = self._write("curves.csv", curves_csv(measure))
        logger.info(f"Exported {len(measure)} curves to {self.out_dir}")
        return json_path, csv_path

    def export_report(self, report: Any) -> Path:
        """Write ``report.json`` from a pydantic report model."""
        return self.write_json("report.json", report.model_dump())

    def export_trajectories(
        self, seeds: Sequence[HPoint], trajectories: Sequence[HorizontalCurve], gronwall: Sequence
    ) -> Tuple[Path, Path]:
        """Write ``trajectories.csv`` and ``gronwall.json`` for a flow run."""
        csv_path = self._write("trajectories.csv", trajectories_csv(trajectories))
        entries = []
        for seed, curve, report in zip(seeds, trajectories, gronwall):
            entry: Dict[str, Any] = {"seed": encode_point(seed), "end": encode_point(curve.end)}
            entry.update(report.to_dict() if report is not None else {"holds": None})
            entries.append(entry)
        json_path = self.write_json("gronwall.json", {"trajectories": entries})
        logger.info(f"Exported {len(trajectories)} trajectories to {self.out_dir}")
        return csv_path, json_path

