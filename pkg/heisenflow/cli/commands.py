"""Command handlers. Each returns the process exit code."""

import argparse
from pathlib import Path
from typing import List, Optional, Tuple

from heisenflow.cli.presets import build_field, resolve_charge
from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.fields import HVectorField
from heisenflow.models.point import HPoint
from heisenflow.models.schemas import DivergenceAtoms
from heisenflow.services.decomposition_service import DecompositionService
from heisenflow.services.export_service import (
    ExportService,
    load_charge_document,
    load_field_table,
    load_measure,
)
from heisenflow.services.flow_service import FlowConfig, gronwall_certificate, integrate
from heisenflow.services.lifting_service import LiftingService
from heisenflow.services.verification_service import (
    VerificationReport,
    VerificationTolerances,
    verify_decomposition,
)
from heisenflow.utils.config import RunConfig, load_run_config
from heisenflow.utils.exceptions import InputError
from heisenflow.utils.logger import get_logger
from heisenflow.utils.performance import Timer, get_monitor

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_WRONG_PIPELINE = 2
EXIT_VERIFICATION = 3


def parse_floats(text: str, option: str) -> List[float]:
    """Comma separated numbers, as given to ``--seed`` or ``--epsilon-schedule``."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(
            f"expected comma separated numbers, got {text!r}", location=option
        ) from None


def _config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config)
    updates = {}
    if getattr(args, "epsilon_schedule", None):
        schedule = parse_floats(args.epsilon_schedule, "--epsilon-schedule")
        updates["epsilon_schedule"] = schedule
        updates["epsilon"] = schedule[-1]
    if getattr(args, "threads", None):
        updates["threads"] = args.threads
    if not updates:
        return config
    try:
        return RunConfig.model_validate({**config.to_json_dict(), **updates})
    except ValueError as exc:
        raise InputError(str(exc), location="command line") from exc


def _charge(path: str, config: RunConfig) -> Tuple[DiscreteCharge, Optional[DivergenceAtoms]]:
    document = load_charge_document(path)
    if document.n != config.n:
        raise InputError(
            f"charge has n={document.n} but the config has n={config.n}", path=path, location="n"
        )
    return resolve_charge(document)


def _finish(report: VerificationReport) -> int:
    if report.passed:
        logger.info("All verification checks passed")
        return EXIT_OK
    logger.error(f"Verification failed: {', '.join(report.failing())}")
    return EXIT_VERIFICATION


def cmd_decompose(args: argparse.Namespace) -> int:
    """Decompose a charge and verify the result.

    Writes ``curves.json``, ``curves.csv`` and ``report.json``; an epsilon
    schedule also writes ``refinement.json``.
    """
    config = _config(args)
    charge, divergence = _charge(args.charge, config)
    export = ExportService(args.out or config.output_dir)
    tolerances = VerificationTolerances.from_run_config(config)

    if args.general:
        result = LiftingService(config).run(charge, divergence)
        measure, epsilon, estimate = result.measure, config.epsilon, None
        pipeline = "general"
        export.write_json("lifting.json", result.summary())
    else:
        service = DecompositionService(config)
        schedule = config.schedule
        if len(schedule) > 1:
            steps = service.refine(charge, schedule)
            export.write_json(
                "refinement.json",
                [{"epsilon": s.epsilon, **s.diagnostics} for s in steps],
            )
            final = steps[-1]
            measure, epsilon = final.measure, final.epsilon
            estimate = final.diagnostics["variation_estimate"] if len(charge) else None
        else:
            outcome = service.run(charge)
            measure, epsilon = outcome.measure, outcome.epsilon
            estimate = outcome.variation_estimate if len(charge) else None
        pipeline = "solenoidal"

    export.export_measure(measure, pipeline, epsilon)
    with Timer("verify"):
        report = verify_decomposition(
            charge,
            measure,
            epsilon,
            config.grid,
            tolerances=tolerances,
            pipeline=pipeline,
            local_nodes=config.local_nodes,
            jitter_seed=config.jitter_seed,
            variation_estimate=estimate,
        )
    export.export_report(report)
    get_monitor().log_summary()
    return _finish(report)


def cmd_verify(args: argparse.Namespace) -> int:
    """Re-run the verification checks on a stored ``curves.json``."""
    config = _config(args)
    charge, _ = _charge(args.charge, config)
    measure, document = load_measure(args.curves)
    if len(measure) and measure.n != charge.n:
        raise InputError(
            f"curves have n={measure.n} but the charge has n={charge.n}", path=args.curves
        )

    pipeline = "general" if args.general else (document.pipeline or "solenoidal")
    epsilon = document.epsilon or config.epsilon
    report = verify_decomposition(
        charge,
        measure,
        epsilon,
        config.grid,
        tolerances=VerificationTolerances.from_run_config(config),
        pipeline=pipeline,
        local_nodes=config.local_nodes,
        jitter_seed=config.jitter_seed,
    )
    if args.out:
        ExportService(args.out).export_report(report)
    for check in report.checks:
        state = "skip" if check.skipped else ("ok" if check.passed else "FAIL")
        logger.info(f"{check.name}: {check.value:.3e} (tolerance {check.tolerance:.1e}) {state}")
    return _finish(report)


def _field(spec: str, config: RunConfig) -> HVectorField:
    if Path(spec).suffix == ".json":
        table = load_field_table(spec)
        if table.n != config.n:
            raise InputError(
                f"field has n={table.n} but the config has n={config.n}", path=spec, location="n"
            )
        return table.to_field()
    return build_field(spec, config.n, config.epsilon)


def cmd_flow(args: argparse.Namespace) -> int:
    """Integrate a field from the given seeds over ``[0, l]``.

    Writes ``trajectories.csv`` and ``gronwall.json``.
    """
    config = _config(args)
    field = _field(args.field, config)
    seeds = []
    for text in args.seed:
        coords = parse_floats(text, "--seed")
        if len(coords) != 2 * config.n + 1:
            raise InputError(
                f"seed needs {2 * config.n + 1} coordinates, got {len(coords)}", location="--seed"
            )
        seeds.append(HPoint(coords))

    flow = FlowConfig(dt=config.dt, t_max=config.horizon)
    trajectories = [integrate(seed, field, flow) for seed in seeds]
    reports = [
        gronwall_certificate(curve, field.growth_bound) if field.growth_bound is not None else None
        for curve in trajectories
    ]
    ExportService(args.out or config.output_dir).export_trajectories(seeds, trajectories, reports)
    for seed, curve in zip(seeds, trajectories):
        logger.info(f"{seed} -> {curve.end}")
    return EXIT_OK
