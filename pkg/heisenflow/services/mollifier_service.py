"""Group mollifiers, mollified charges, and the seed quadrature of their density.

The mollifier profile is ``exp(-1 / (1 - s^2))`` with ``s = ||p||^2`` on the
unit norm ball. ``J_eps(p) = eps^-Q J(delta_{1/eps} p)`` with homogeneous
dimension ``Q = 2n + 2`` keeps unit Haar mass.

Convolution places the kernel on the left of each atom: an atom ``(x, v)``
contributes ``J(p x^-1) v`` at ``p``. Left-invariant derivatives then fall on
the charge, so ``div_H (mu * J) = (div_H mu) * J`` and a solenoidal charge
mollifies to a divergence-free field.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import dblquad
from scipy.spatial import cKDTree

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.fields import HVectorField
from heisenflow.models.point import HorizontalVector, HPoint
from heisenflow.models.quadrature import SeedQuadrature
from heisenflow.services.group_service import dilate_array, inv_array, mul_array
from heisenflow.utils.config import settings
from heisenflow.utils.exceptions import EmptyChargeError, InvalidParameterError
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import check_last_axis, check_same_n, require_positive

logger = get_logger(__name__)


def _bump_of_norm4(s2: np.ndarray) -> np.ndarray:
    """Profile as a function of ``||q||^4``; zero outside the unit ball."""
    s2 = np.asarray(s2, dtype=float)
    inside = s2 < 1.0
    out = np.zeros_like(s2)
    out[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
    return out


def _sphere_area(n: int) -> float:
    """Area of the unit sphere in ℝ^{2n}."""
    return 2.0 * math.pi**n / math.gamma(n)


@lru_cache(maxsize=None)
def unit_profile_integral(n: int) -> float:
    """Haar integral of the unnormalized profile over ℍⁿ.

    Reduced to the radius ``rho`` of the horizontal part and ``z``:
    ``|S^{2n-1}| int_0^1 rho^{2n-1} int exp(-1/(1 - rho^4 - z^2)) dz drho``.
    """

    def integrand(z: float, rho: float) -> float:
        gap = 1.0 - rho**4 - z * z
        if gap <= 0.0:
            return 0.0
        return rho ** (2 * n - 1) * math.exp(-1.0 / gap)

    half, _ = dblquad(
        integrand,
        0.0,
        1.0,
        lambda rho: 0.0,
        lambda rho: math.sqrt(max(0.0, 1.0 - rho**4)),
        epsabs=1e-14,
        epsrel=1e-12,
    )
    return 2.0 * half * _sphere_area(n)


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass bump supported in the norm ball of radius ``epsilon``."""

    n: int
    epsilon: float = 1.0
    normalization: float = field(init=False)

    def __post_init__(self):
        require_positive(self.epsilon, "mollifier scale")
        object.__setattr__(self, "normalization", 1.0 / unit_profile_integral(self.n))

    @property
    def homogeneous_dimension(self) -> int:
        return 2 * self.n + 2

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = check_last_axis(np.asarray(points, dtype=float), 2 * self.n + 1, "points")
        scaled = dilate_array(1.0 / self.epsilon, points)
        h2 = np.sum(scaled[..., :-1] ** 2, axis=-1)
        values = _bump_of_norm4(h2 * h2 + scaled[..., -1] ** 2)
        return values * (self.normalization * self.epsilon ** (-self.homogeneous_dimension))

    def __call__(self, p: HPoint) -> float:
        return float(self.evaluate(p.coords))

    def rescale(self, epsilon: float) -> "Mollifier":
        return Mollifier(self.n, epsilon)


def mollifier_rescale(J: Mollifier, epsilon: float) -> Mollifier:
    """The mollifier at scale ``epsilon``.

    Raises:
        InvalidParameterError: If ``epsilon <= 0``
    """
    if not epsilon > 0:
        raise InvalidParameterError(f"mollifier scale must be positive, got {epsilon}")
    return J.rescale(epsilon)


def local_quadrature(
    J: Mollifier, nodes_per_axis: int, jitter_seed: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint rule for ``J`` on its support box, renormalized to unit mass.

    The box is ``[-eps, eps]^{2n} x [-eps^2, eps^2]`` split into
    ``nodes_per_axis`` cells per axis. With ``jitter_seed`` the lattice is
    shifted by a fixed random fraction of a cell.

    Returns:
        Tuple of (offsets ``(K, 2n+1)``, weights ``(K,)`` summing to 1)
    """
    if nodes_per_axis < 1:
        raise InvalidParameterError(f"nodes_per_axis must be positive, got {nodes_per_axis}")
    d = 2 * J.n + 1
    half = np.full(d, J.epsilon)
    half[-1] = J.epsilon**2
    width = 2.0 * half / nodes_per_axis

    shift = np.full(d, 0.5)
    if jitter_seed is not None:
        shift = np.random.default_rng(jitter_seed).uniform(0.0, 1.0, size=d)

    axes = [-half[i] + width[i] * (np.arange(nodes_per_axis) + shift[i]) for i in range(d)]
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    values = J.evaluate(offsets)
    keep = values > 0.0
    offsets, values = offsets[keep], values[keep]
    if values.size == 0:
        raise InvalidParameterError("local quadrature has no node inside the mollifier support")
    return offsets, values / np.sum(values)


class AtomIndex:
    """KD-tree over atom coordinates answering 'which atoms are within norm radius r'.

    A point ``p`` with ``||p x^-1|| < r`` satisfies ``|dh| < r`` and
    ``|dz| < r^2 + |x_h| r / 2``, which bounds the Euclidean search radius.
    """

    def __init__(self, points: np.ndarray, radius: float):
        self.points = np.asarray(points, dtype=float)
        self.radius = require_positive(radius, "search radius")
        extent = 0.0
        if len(self.points):
            extent = float(np.max(np.linalg.norm(self.points[:, :-1], axis=1)))
        vertical = radius**2 + 0.5 * extent * radius
        self.search_radius = math.sqrt(radius**2 + vertical**2)
        self._tree = cKDTree(self.points) if len(self.points) else None

    def candidates(self, queries: np.ndarray, workers: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Flattened (query index, atom index) pairs within the Euclidean search radius."""
        if self._tree is None or len(queries) == 0:
            empty = np.zeros(0, dtype=np.intp)
            return empty, empty
        neighbors = self._tree.query_ball_point(
            queries, self.search_radius, workers=workers, return_sorted=True
        )
        counts = np.fromiter(map(len, neighbors), dtype=np.intp, count=len(neighbors))
        atom_idx = np.fromiter(
            itertools.chain.from_iterable(neighbors), dtype=np.intp, count=int(counts.sum())
        )
        query_idx = np.repeat(np.arange(len(queries), dtype=np.intp), counts)
        return query_idx, atom_idx

    def within(self, queries: np.ndarray) -> np.ndarray:
        """Boolean mask: some atom lies within norm distance ``radius`` of the query."""
        query_idx, atom_idx = self.candidates(queries)
        mask = np.zeros(len(queries), dtype=bool)
        if query_idx.size:
            rel = mul_array(queries[query_idx], inv_array(self.points[atom_idx]))
            h2 = np.sum(rel[:, :-1] ** 2, axis=1)
            close = np.sqrt(np.sqrt(h2 * h2 + rel[:, -1] ** 2)) <= self.radius
            mask[query_idx[close]] = True
        return mask


def mollify_charge(mu: DiscreteCharge, J: Mollifier, p: HPoint) -> Tuple[HorizontalVector, float]:
    """``(mu * J)(p)`` and ``(|mu| * J)(p)`` by direct summation over atoms."""
    check_same_n(mu.n, J.n, "mollify_charge")
    check_same_n(mu.n, p.n, "mollify_charge")
    if mu.is_empty:
        return HorizontalVector.zero(mu.n), 0.0
    kernel = J.evaluate(mul_array(p.coords, inv_array(mu.points)))
    return HorizontalVector(kernel @ mu.vectors), float(kernel @ mu.weights)


class MollifiedCharge:
    """Vectorized evaluation of a charge convolved with a mollifier.

    Args:
        charge: The discrete charge
        mollifier: Mollifier at the working scale
        density_cutoff: Relative density below which the direction field is zero
        workers: Threads used by KD-tree queries
    """

    def __init__(
        self,
        charge: DiscreteCharge,
        mollifier: Mollifier,
        density_cutoff: float = settings.DENSITY_CUTOFF,
        workers: int = 1,
    ):
        check_same_n(charge.n, mollifier.n, "MollifiedCharge")
        self.charge = charge
        self.mollifier = mollifier
        self.n = charge.n
        self.workers = workers
        self.threshold = density_cutoff * charge.variation
        self._weights = charge.weights
        self._index = AtomIndex(charge.points, mollifier.epsilon)

    @property
    def epsilon(self) -> float:
        return self.mollifier.epsilon

    def evaluate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return ``(mu * J, |mu| * J)`` at ``points``."""
        points = check_last_axis(np.asarray(points, dtype=float), 2 * self.n + 1, "points")
        shape = points.shape[:-1]
        flat = points.reshape(-1, 2 * self.n + 1)
        count = flat.shape[0]
        vectors = np.zeros((count, 2 * self.n))
        density = np.zeros(count)

        query_idx, atom_idx = self._index.candidates(flat, self.workers)
        if query_idx.size:
            rel = mul_array(flat[query_idx], inv_array(self.charge.points[atom_idx]))
            kernel = self.mollifier.evaluate(rel)
            density = np.bincount(
                query_idx, weights=kernel * self._weights[atom_idx], minlength=count
            )
            for j in range(2 * self.n):
                vectors[:, j] = np.bincount(
                    query_idx, weights=kernel * self.charge.vectors[atom_idx, j], minlength=count
                )
        return vectors.reshape(shape + (2 * self.n,)), density.reshape(shape)

    def direction(self, points: np.ndarray) -> np.ndarray:
        """``phi = (mu * J) / (|mu| * J)``, zero where the density is negligible."""
        vectors, density = self.evaluate(points)
        positive = density >= self.threshold
        if self.threshold == 0.0:
            positive = density > 0.0
        safe = np.where(positive, density, 1.0)
        return np.where(positive[..., None], vectors / safe[..., None], 0.0)

    def direction_field(self) -> HVectorField:
        return HVectorField(
            func=self.direction,
            n=self.n,
            growth_bound=1.0,
            sup_norm=1.0,
            name=f"mollified direction (eps={self.epsilon:g})",
        )

    def vector_field(self) -> HVectorField:
        return HVectorField(
            func=lambda p: self.evaluate(p)[0], n=self.n, name="mollified charge"
        )

    def variation_estimate(self, seeds: SeedQuadrature) -> float:
        """Quadrature of ``|mu * J|`` as ``sum_k mass_k |phi(x_k)|``."""
        if len(seeds) == 0:
            return 0.0
        speeds = np.linalg.norm(self.direction(seeds.nodes), axis=1)
        return seeds.integrate(speeds)


def mollified_pairing(
    mu: DiscreteCharge,
    J: Mollifier,
    field: HVectorField,
    local_nodes: int = settings.DEFAULT_LOCAL_NODES,
    jitter_seed: Optional[int] = None,
) -> float:
    """``<mu * J, Phi> = sum_i int J(q) <Phi(q x_i), v_i> dq`` with the local rule."""
    if mu.is_empty:
        return 0.0
    offsets, weights = local_quadrature(J, local_nodes, jitter_seed)
    total = 0.0
    for point, vector in zip(mu.points, mu.vectors):
        values = field.evaluate(mul_array(offsets, point))
        total += float(weights @ (values @ vector))
    return total


def seed_quadrature(
    engine: MollifiedCharge,
    grid: float,
    local_nodes: int = settings.DEFAULT_LOCAL_NODES,
    jitter_seed: Optional[int] = None,
) -> SeedQuadrature:
    """Discretize ``rho = (|mu| * J) h``.

    The unit-mass local rule of ``J`` is translated to every atom and scaled
    by the atom weight, then aggregated into bins of horizontal size ``grid``
    and vertical size ``grid * eps``. Each bin becomes one node at its
    mass-weighted centroid, so total mass equals ``var(mu)``.

    Raises:
        EmptyChargeError: If a non-empty charge yields no nodes
    """
    require_positive(grid, "grid")
    charge = engine.charge
    d = 2 * charge.n + 1
    if charge.is_empty:
        return SeedQuadrature(np.zeros((0, d)), np.zeros(0))

    offsets, weights = local_quadrature(engine.mollifier, local_nodes, jitter_seed)
    nodes = mul_array(offsets[None, :, :], charge.points[:, None, :]).reshape(-1, d)
    masses = (charge.weights[:, None] * weights[None, :]).reshape(-1)

    cell = np.full(d, grid)
    cell[-1] = grid * engine.epsilon
    keys = np.floor(nodes / cell).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)

    bin_mass = np.bincount(inverse, weights=masses)
    centroids = np.column_stack(
        [np.bincount(inverse, weights=masses * nodes[:, j]) for j in range(d)]
    ) / bin_mass[:, None]
    keep = bin_mass > 0.0
    if not np.any(keep):
        raise EmptyChargeError("seed quadrature produced no nodes")

    logger.info(
        f"Seed quadrature: {len(charge)} atoms x {len(weights)} local nodes -> "
        f"{int(keep.sum())} seeds"
    )
    return SeedQuadrature(centroids[keep], bin_mass[keep])
