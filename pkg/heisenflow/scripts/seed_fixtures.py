"""Expand the bundled preset fixtures into explicit-atom charge files.

Usage:
    python -m heisenflow.scripts.seed_fixtures [--fixtures fixtures] [--out fixtures/expanded]
"""

import argparse
from pathlib import Path
from typing import List, Optional

from heisenflow.cli.presets import resolve_charge, to_document
from heisenflow.services.export_service import ExportService, charge_to_dict, load_charge_document
from heisenflow.utils.logger import get_logger

logger = get_logger(__name__)

PRESET_FIXTURES = ("figure_eight.json", "rotational_annulus.json", "segment.json")


def seed_fixtures(fixtures: Path, out: Path) -> List[Path]:
    """Write one explicit charge file per preset fixture and return their paths."""
    export = ExportService(out)
    written = []
    for name in PRESET_FIXTURES:
        charge, divergence = resolve_charge(load_charge_document(fixtures / name))
        written.append(export.write_json(name, charge_to_dict(to_document(charge, divergence))))
        logger.info(f"Expanded {name}: {len(charge)} atoms, var={charge.variation:.6g}")
    return written


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fixtures", default="fixtures", help="directory of preset fixtures")
    parser.add_argument("--out", default="fixtures/expanded", help="output directory")
    args = parser.parse_args(argv)
    seed_fixtures(Path(args.fixtures), Path(args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
