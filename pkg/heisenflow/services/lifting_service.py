"""Decomposition of charges whose divergence is a measure.

A charge ``mu`` on ℍⁿ with ``div_H mu = sum_k m_k delta_{x_k}`` is lifted to
ℍⁿ⁺¹ with coordinates ``(x, x_{n+1}, y, y_{n+1}, z)`` through
``E(p, t) = (x, t, y, 0, z)``: a copy of ``mu`` at height 0, its negative at
height ``l``, and along every vertical segment ``{E(x_k, t)}`` atoms in the
``X_{n+1}`` direction carrying ``-m_k`` per unit length. The lift is
solenoidal. Its flow lines are classified by contact with the base plane,
clipped to their first and last contact, and projected back.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import CurveMeasure, HorizontalCurve
from heisenflow.services.decomposition_service import (
    DecompositionResult,
    DecompositionService,
    build_run_config,
)
from heisenflow.services.dictionary_service import divergence_residual
from heisenflow.services.flow_service import FlowConfig
from heisenflow.utils.config import RunConfig
from heisenflow.utils.exceptions import DimensionMismatchError, NoPlaneContactError
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import require_positive

logger = get_logger(__name__)


def embed_points(points: np.ndarray, height: np.ndarray) -> np.ndarray:
    """``E(p, t) = (x, t, y, 0, z)`` over leading axes."""
    points = np.asarray(points, dtype=float)
    n = (points.shape[-1] - 1) // 2
    height = np.broadcast_to(np.asarray(height, dtype=float), points.shape[:-1])
    zeros = np.zeros(points.shape[:-1])
    return np.concatenate(
        [
            points[..., :n],
            height[..., None],
            points[..., n : 2 * n],
            zeros[..., None],
            points[..., -1:],
        ],
        axis=-1,
    )


def embed_vectors(vectors: np.ndarray) -> np.ndarray:
    """Frame coefficients on ℍⁿ as coefficients on ℍⁿ⁺¹ with zero new components."""
    vectors = np.asarray(vectors, dtype=float)
    n = vectors.shape[-1] // 2
    zeros = np.zeros(vectors.shape[:-1] + (1,))
    return np.concatenate([vectors[..., :n], zeros, vectors[..., n:], zeros], axis=-1)


def project_points(points: np.ndarray) -> np.ndarray:
    """Drop ``x_{n+1}`` and ``y_{n+1}``."""
    points = np.asarray(points, dtype=float)
    m = (points.shape[-1] - 1) // 2
    keep = [i for i in range(points.shape[-1]) if i not in (m - 1, 2 * m - 1)]
    return points[..., keep]


def project_vectors(vectors: np.ndarray) -> np.ndarray:
    """Drop the ``X_{n+1}`` and ``Y_{n+1}`` coefficients."""
    vectors = np.asarray(vectors, dtype=float)
    m = vectors.shape[-1] // 2
    keep = [i for i in range(vectors.shape[-1]) if i not in (m - 1, 2 * m - 1)]
    return vectors[..., keep]


@dataclass(frozen=True)
class LiftedCharge:
    """The lift of ``base`` to ℍⁿ⁺¹ over ``[0, horizon]``."""

    base: DiscreteCharge
    horizon: float
    charge: DiscreteCharge
    divergence_points: np.ndarray
    divergence_masses: np.ndarray
    segment_count: int

    @property
    def n(self) -> int:
        return self.charge.n

    @property
    def height_index(self) -> int:
        """Coordinate index of ``x_{n+1}`` (also the ``X_{n+1}`` coefficient index)."""
        return self.base.n

    @property
    def divergence_mass(self) -> float:
        return float(np.sum(np.abs(self.divergence_masses)))


def _default_segment_count(mu: DiscreteCharge, horizon: float) -> int:
    """``l`` over the median nearest-neighbour spacing of the atoms."""
    if len(mu) < 2:
        return 64
    distances, _ = cKDTree(mu.points).query(mu.points, k=2)
    spacing = float(np.median(distances[:, 1]))
    if spacing <= 0.0:
        return 64
    return max(1, int(math.ceil(horizon / spacing)))


def lift_charge(
    mu: DiscreteCharge,
    divergence_atoms: Sequence[Tuple[Sequence[float], float]],
    horizon: float,
    segment_count: Optional[int] = None,
) -> LiftedCharge:
    """Build the solenoidal lift of ``mu``.

    Args:
        mu: Charge on ℍⁿ
        divergence_atoms: ``(point, m)`` pairs with ``div_H mu ~ sum m delta_point``
        horizon: Height ``l`` of the top copy
        segment_count: Midpoint atoms per vertical segment

    Raises:
        DimensionMismatchError: If a divergence point is not in ℍⁿ
    """
    require_positive(horizon, "horizon")
    d = 2 * mu.n + 1
    points = [np.asarray(p, dtype=float) for p, _ in divergence_atoms]
    for p in points:
        if p.shape != (d,):
            raise DimensionMismatchError(f"divergence point needs {d} coordinates, got {p.shape}")
    div_points = np.stack(points) if points else np.zeros((0, d))
    div_masses = np.array([float(m) for _, m in divergence_atoms])

    count = segment_count or _default_segment_count(mu, horizon)
    step = horizon / count
    heights = (np.arange(count) + 0.5) * step

    bottom_points = embed_points(mu.points, 0.0)
    top_points = embed_points(mu.points, horizon)
    lifted_vectors = embed_vectors(mu.vectors)

    columns = np.broadcast_to(div_points[:, None, :], (div_points.shape[0], count, d))
    seg_points = embed_points(columns, heights[None, :]).reshape(-1, d + 2)
    seg_vectors = np.zeros((div_points.shape[0], count, 2 * mu.n + 2))
    seg_vectors[..., mu.n] = -div_masses[:, None] * step

    charge = DiscreteCharge(
        mu.n + 1,
        np.concatenate([bottom_points, top_points, seg_points]),
        np.concatenate([lifted_vectors, -lifted_vectors, seg_vectors.reshape(-1, 2 * mu.n + 2)]),
    )
    logger.info(
        f"Lifted {len(mu)} atoms and {len(div_masses)} divergence atoms "
        f"into {len(charge)} atoms of H^{mu.n + 1} (l={horizon:g}, {count} segments)"
    )
    return LiftedCharge(mu, float(horizon), charge, div_points, div_masses, count)


def lifted_divergence_residual(lifted: LiftedCharge) -> float:
    return divergence_residual(lifted.charge)


def restrict_to_height(
    lifted: LiftedCharge, height: float = 0.0, tolerance: float = 1e-12
) -> DiscreteCharge:
    """Project the lifted atoms lying at ``x_{n+1} = height``; new-direction parts drop out."""
    charge = lifted.charge
    mask = np.abs(charge.points[:, lifted.height_index] - height) <= tolerance
    return DiscreteCharge(
        lifted.base.n,
        project_points(charge.points[mask]),
        project_vectors(charge.vectors[mask]),
    )


def _bspline(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cubic cardinal B-spline on ``[-2, 2]`` and its derivative."""
    a = np.abs(u)
    value = np.where(
        a < 1.0,
        (4.0 - 6.0 * a**2 + 3.0 * a**3) / 6.0,
        np.where(a < 2.0, (2.0 - a) ** 3 / 6.0, 0.0),
    )
    slope = np.where(
        a < 1.0,
        (-12.0 * a + 9.0 * a**2) / 6.0,
        np.where(a < 2.0, -0.5 * (2.0 - a) ** 2, 0.0),
    )
    return value, slope * np.sign(u)


def extract_divergence_atoms(
    mu: DiscreteCharge, spacing: float, cutoff: float = 1e-12
) -> list[Tuple[np.ndarray, float]]:
    """Atomic approximation of ``div_H mu`` on a coordinate grid.

    The tensor cubic B-splines ``psi_k`` centered on grid nodes form a smooth
    partition of unity; node ``k`` receives ``m_k = -sum_i <grad_H psi_k(x_i), v_i>``.
    Nodes with ``|m_k| <= cutoff var(mu)`` are dropped.
    """
    require_positive(spacing, "divergence grid spacing")
    if mu.is_empty:
        return []
    n = mu.n
    d = 2 * n + 1
    u = mu.points / spacing
    base = np.floor(u).astype(np.int64) - 1
    offsets = np.stack(np.meshgrid(*([np.arange(4)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    nodes = base[:, None, :] + offsets[None, :, :]
    values, slopes = _bspline(u[:, None, :] - nodes)

    # coordinate gradient of the tensor product, one column per axis
    grad = np.empty(values.shape)
    for axis in range(d):
        others = np.prod(np.delete(values, axis, axis=-1), axis=-1)
        grad[..., axis] = slopes[..., axis] * others / spacing

    x = mu.points[:, None, :n]
    y = mu.points[:, None, n : 2 * n]
    horizontal = np.concatenate(
        [
            grad[..., :n] - 0.5 * y * grad[..., -1:],
            grad[..., n : 2 * n] + 0.5 * x * grad[..., -1:],
        ],
        axis=-1,
    )
    contributions = -np.sum(horizontal * mu.vectors[:, None, :], axis=-1).reshape(-1)

    keys, inverse = np.unique(nodes.reshape(-1, d), axis=0, return_inverse=True)
    masses = np.bincount(inverse.reshape(-1), weights=contributions, minlength=keys.shape[0])
    keep = np.abs(masses) > cutoff * mu.variation
    centers = keys[keep] * spacing
    logger.info(f"Extracted {int(keep.sum())} divergence atoms at spacing {spacing:g}")
    return [(c.astype(float), float(m)) for c, m in zip(centers, masses[keep])]


@dataclass
class GeneralDecomposition:
    """Projected curve measure and the bookkeeping of the lifted run."""

    measure: CurveMeasure
    lifted: LiftedCharge
    lifted_result: DecompositionResult
    kept: int
    dropped: int
    kept_mass: float
    dropped_mass: float
    mean_clipped_duration: float
    lifted_residual: float

    def summary(self) -> Dict[str, Any]:
        return {
            "curves": len(self.measure),
            "kept": self.kept,
            "dropped": self.dropped,
            "kept_mass": self.kept_mass,
            "dropped_mass": self.dropped_mass,
            "mean_clipped_duration": self.mean_clipped_duration,
            "lifted_residual": self.lifted_residual,
            "divergence_mass": self.lifted.divergence_mass,
        }


def plane_contact(
    curve: HorizontalCurve, height_index: int, band: float, vertical_threshold: float
) -> Tuple[int, int]:
    """First and last sample in the base plane band that is not moving vertically.

    Raises:
        NoPlaneContactError: If no sample qualifies
    """
    heights = curve.samples[:, height_index]
    vertical = np.abs(curve.velocities[:, height_index]) >= vertical_threshold
    contact = np.flatnonzero((np.abs(heights) <= band) & ~vertical)
    if contact.size == 0:
        raise NoPlaneContactError(
            f"curve from {curve.samples[0].tolist()} never meets the plane band {band:g}"
        )
    return int(contact[0]), int(contact[-1])


def project_curve(curve: HorizontalCurve, first: int, last: int) -> HorizontalCurve:
    """Clamp to ``[t_first, t_last]``, drop the new directions, and re-lift z.

    Outside the window the curve rests at its clamped endpoint with zero
    velocity; z starts from the lifted value at ``first``.
    """
    horizontal = project_vectors(curve.samples[:, :-1])
    velocities = project_vectors(curve.velocities)
    horizontal = horizontal.copy()
    velocities = velocities.copy()
    horizontal[:first] = horizontal[first]
    horizontal[last + 1 :] = horizontal[last]
    velocities[:first] = 0.0
    velocities[last + 1 :] = 0.0
    return HorizontalCurve.from_horizontal_path(
        horizontal, velocities, curve.horizon, z0=float(curve.samples[first, -1])
    )


class LiftingService:
    """General pipeline: lift, decompose in ℍⁿ⁺¹, classify and project."""

    def __init__(self, config: RunConfig, threads: Optional[int] = None):
        self.config = config
        self.threads = threads or config.threads

    def lifted_config(self) -> RunConfig:
        return self.config.model_copy(update={"n": self.config.n + 1})

    @property
    def divergence_spacing(self) -> float:
        """Grid of extracted divergence atoms: ``divergence_grid``, else ``2 eps``."""
        return self.config.divergence_grid or 2.0 * self.config.epsilon

    def run(
        self,
        mu: DiscreteCharge,
        divergence_atoms: Optional[Sequence[Tuple[Sequence[float], float]]] = None,
    ) -> GeneralDecomposition:
        config = self.config
        horizon = config.horizon
        if divergence_atoms is None:
            divergence_atoms = extract_divergence_atoms(mu, self.divergence_spacing)

        lifted = lift_charge(mu, divergence_atoms, horizon, config.segment_count)
        residual = lifted_divergence_residual(lifted)
        result = DecompositionService(self.lifted_config(), self.threads).run(
            lifted.charge, check_solenoidal=False
        )

        band = config.plane_tolerance or config.epsilon
        kept_curves, kept_weights, clipped = [], [], []
        dropped, dropped_mass = 0, 0.0
        for curve, weight in result.measure.entries():
            try:
                first, last = plane_contact(
                    curve, lifted.height_index, band, config.vertical_threshold
                )
            except NoPlaneContactError:
                dropped += 1
                dropped_mass += weight
                continue
            kept_curves.append(project_curve(curve, first, last))
            kept_weights.append(weight)
            clipped.append(horizon - (last - first) * curve.dt)

        weights = np.asarray(kept_weights)
        measure = CurveMeasure(horizon, tuple(kept_curves), weights)
        mean_clipped = float(np.dot(weights, clipped) / weights.sum()) if kept_curves else 0.0
        logger.info(
            f"General decomposition: kept {len(kept_curves)} curves, "
            f"dropped {dropped} without plane contact"
        )
        if dropped and not kept_curves:
            logger.warning("No lifted curve met the base plane")
        return GeneralDecomposition(
            measure=measure,
            lifted=lifted,
            lifted_result=result,
            kept=len(kept_curves),
            dropped=dropped,
            kept_mass=float(weights.sum()) if kept_curves else 0.0,
            dropped_mass=dropped_mass,
            mean_clipped_duration=mean_clipped,
            lifted_residual=residual,
        )


def decompose_general(
    mu: DiscreteCharge,
    divergence_atoms: Optional[Sequence[Tuple[Sequence[float], float]]],
    horizon: float,
    epsilon: float,
    grid: float,
    flow: FlowConfig,
    threads: int = 1,
    **overrides: Any,
) -> CurveMeasure:
    """Curve measure on ℍⁿ reconstructing ``mu`` through its solenoidal lift.

    ``divergence_atoms=None`` extracts them on a grid of spacing
    ``divergence_grid`` (default ``2 eps``).
    """
    config = build_run_config(mu.n, horizon, epsilon, grid, flow, overrides)
    return LiftingService(config, threads).run(mu, divergence_atoms).measure
