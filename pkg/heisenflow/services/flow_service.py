"""Flow integration of horizontal vector fields.

Trajectories are advanced with the classical fourth-order Runge-Kutta scheme
on the coordinate system ``h' = v``, ``z' = omega(h, v) / 2``. After every
step the vertical coordinate is replaced by the contact integral of the cubic
Hermite segment through the new samples, so stored curves satisfy the
discrete contact identity to rounding. The end velocity is re-evaluated at
the corrected point, so stored velocities are the field at the stored samples.
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from heisenflow.models.charge import DiscreteCharge
from heisenflow.models.curve import HorizontalCurve, contact_increment, hermite_state
from heisenflow.models.fields import HVectorField, ScalarField
from heisenflow.models.point import HPoint
from heisenflow.services.group_service import embed_horizontal, homogeneous_norm_array
from heisenflow.services.mollifier_service import MollifiedCharge, Mollifier, seed_quadrature
from heisenflow.utils.config import settings
from heisenflow.utils.exceptions import (
    HorizonExceededError,
    InvalidParameterError,
    SpeedBoundError,
)
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import check_last_axis, check_same_n

logger = get_logger(__name__)


class FlowConfig(BaseModel):
    """Integration settings. The step count is ``round(t_max / dt)``."""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0)
    t_max: float = Field(gt=0)
    method: Literal["rk4"] = "rk4"
    gronwall_check: bool = False
    gronwall_rate: Optional[float] = Field(default=None, gt=0)
    speed_tolerance: float = Field(default_factory=lambda: settings.SPEED_TOLERANCE, ge=0)

    @model_validator(mode="after")
    def _check_step(self) -> "FlowConfig":
        if self.dt > self.t_max:
            raise ValueError(f"dt={self.dt} exceeds t_max={self.t_max}")
        return self

    @property
    def steps(self) -> int:
        return max(1, int(round(self.t_max / self.dt)))

    @property
    def step(self) -> float:
        return self.t_max / self.steps


class TrajectoryCache:
    """Write-once, thread-safe store of integrated trajectories.

    The first value stored under a key wins; later writes return it unchanged.
    """

    def __init__(self):
        self._store: Dict[Hashable, HorizontalCurve] = {}
        self._lock = threading.Lock()
        self.stats = {"hits": 0, "misses": 0, "sets": 0}

    def get(self, key: Hashable) -> Optional[HorizontalCurve]:
        with self._lock:
            value = self._store.get(key)
            self.stats["hits" if value is not None else "misses"] += 1
        return value

    def put(self, key: Hashable, value: HorizontalCurve) -> HorizontalCurve:
        with self._lock:
            existing = self._store.setdefault(key, value)
            if existing is value:
                self.stats["sets"] += 1
        return existing

    def clear(self) -> int:
        with self._lock:
            count = len(self._store)
            self._store.clear()
        logger.debug(f"Trajectory cache cleared: {count} entries")
        return count

    def __len__(self) -> int:
        return len(self._store)


def _check_speed(points: np.ndarray, values: np.ndarray, tolerance: float) -> None:
    speeds = np.linalg.norm(values, axis=-1)
    worst = int(np.argmax(speeds))
    if speeds[worst] > 1.0 + tolerance:
        raise SpeedBoundError(points[worst], float(speeds[worst]))


_CONTACT_PASSES = 2


def _integrate_block(
    seeds: np.ndarray, field: HVectorField, config: FlowConfig
) -> Tuple[np.ndarray, np.ndarray]:
    steps, dt = config.steps, config.step
    count, d = seeds.shape
    samples = np.empty((count, steps + 1, d))
    velocities = np.empty((count, steps + 1, d - 1))

    point = seeds.copy()
    velocity = field.evaluate(point)
    _check_speed(point, velocity, config.speed_tolerance)
    samples[:, 0] = point
    velocities[:, 0] = velocity

    def rate(p: np.ndarray) -> np.ndarray:
        return embed_horizontal(p, field.evaluate(p))

    for k in range(steps):
        k1 = embed_horizontal(point, velocity)
        k2 = rate(point + 0.5 * dt * k1)
        k3 = rate(point + 0.5 * dt * k2)
        k4 = rate(point + dt * k3)
        predicted = point + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        # z and the end velocity depend on each other; each pass shrinks the
        # mismatch by a factor of order dt^2, and z always satisfies the contact rule
        new_velocity = field.evaluate(predicted)
        for settle in range(_CONTACT_PASSES + 1):
            gain = contact_increment(
                point[:, :-1], predicted[:, :-1], dt * velocity, dt * new_velocity
            )
            predicted[:, -1] = point[:, -1] + gain
            if settle < _CONTACT_PASSES:
                new_velocity = field.evaluate(predicted)
        _check_speed(predicted, new_velocity, config.speed_tolerance)

        point, velocity = predicted, new_velocity
        samples[:, k + 1] = point
        velocities[:, k + 1] = velocity
    return samples, velocities


def integrate_many(
    seeds: np.ndarray, field: HVectorField, config: FlowConfig, threads: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate from every row of ``seeds``.

    Seeds are split into contiguous chunks, one per thread; each chunk is
    integrated independently, so results do not depend on ``threads``.

    Returns:
        Tuple of (samples ``(N, M+1, 2n+1)``, velocities ``(N, M+1, 2n)``)

    Raises:
        InvalidParameterError: If the field is flagged non-smooth
        SpeedBoundError: If the field exceeds unit speed at a visited point
    """
    if not field.smooth:
        raise InvalidParameterError(
            f"field {field.name or '<anonymous>'} is not smooth; mollify it before integrating"
        )
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    check_last_axis(seeds, 2 * field.n + 1, "seeds")
    if seeds.shape[0] == 0:
        return (
            np.zeros((0, config.steps + 1, 2 * field.n + 1)),
            np.zeros((0, config.steps + 1, 2 * field.n)),
        )

    if threads <= 1 or seeds.shape[0] < 2:
        return _integrate_block(seeds, field, config)

    chunks = [c for c in np.array_split(np.arange(seeds.shape[0]), threads) if c.size]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda idx: _integrate_block(seeds[idx], field, config), chunks))
    return (
        np.concatenate([s for s, _ in parts]),
        np.concatenate([v for _, v in parts]),
    )


def integrate(seed: HPoint, field: HVectorField, config: FlowConfig) -> HorizontalCurve:
    """The trajectory of ``field`` from ``seed`` on ``[0, t_max]``."""
    check_same_n(seed.n, field.n, "integrate")
    samples, velocities = integrate_many(seed.coords, field, config)
    curve = HorizontalCurve(samples[0], velocities[0], config.t_max)

    if config.gronwall_check and field.growth_bound is not None:
        report = gronwall_certificate(curve, field.growth_bound, config.gronwall_rate)
        if not report.holds:
            logger.warning(
                f"Gronwall bound violated from seed {seed.to_list()}: "
                f"worst excess {report.max_violation:.3e}"
            )
    return curve


class FlowMap:
    """The flow ``u(t, x)`` of a smooth field, with trajectories cached per seed."""

    def __init__(self, field: HVectorField, config: FlowConfig):
        if not field.smooth:
            raise InvalidParameterError("flow maps need a smooth field")
        self.field = field
        self.config = config
        self.cache = TrajectoryCache()
        self._backward = field.negated()

    def trajectory(self, seed: HPoint, backward: bool = False) -> HorizontalCurve:
        key = (seed.coords.tobytes(), backward, self.config.steps, self.config.t_max)
        curve = self.cache.get(key)
        if curve is None:
            field = self._backward if backward else self.field
            curve = self.cache.put(key, integrate(seed, field, self.config))
        return curve

    def __call__(self, x: HPoint, t: float) -> HPoint:
        return flow_at(x, t, self)


def flow_at(x: HPoint, t: float, flow: FlowMap) -> HPoint:
    """``u(t, x)``; negative times follow the reversed field.

    Raises:
        HorizonExceededError: If ``|t| > t_max``
    """
    t_max = flow.config.t_max
    if abs(t) > t_max * (1.0 + 1e-12):
        raise HorizonExceededError(t, t_max)
    if t == 0:
        return x
    curve = flow.trajectory(x, backward=t < 0)
    point, _ = hermite_state(curve.samples, curve.velocities, curve.dt, min(abs(t), t_max))
    return HPoint(point)


@dataclass(frozen=True)
class GronwallReport:
    """Sample-wise check of ``S(t) <= (S(0) + 1) exp(K t) - 1`` with ``S = ||x||^4``."""

    growth: float
    rate: float
    holds: bool
    max_violation: float
    min_slack: float
    samples: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": self.growth,
            "K": self.rate,
            "holds": self.holds,
            "max_violation": self.max_violation,
            "min_slack": self.min_slack,
            "samples": self.samples,
        }


def gronwall_certificate(
    curve: HorizontalCurve, c: float, K: Optional[float] = None
) -> GronwallReport:
    """Verify the Gronwall growth bound along ``curve``.

    For ``|phi(x)| <= c (1 + ||x||)`` the fourth power of the norm grows at
    most like ``dS/dt <= K (S + 1)``; on the unit horizon ``K = 8c`` suffices,
    which is the default.
    """
    rate = 8.0 * c if K is None else float(K)
    S = homogeneous_norm_array(curve.samples) ** 4
    bound = (S[0] + 1.0) * np.exp(rate * curve.times) - 1.0
    excess = S - bound
    tolerance = 1e-12 * np.maximum(1.0, np.abs(bound))
    return GronwallReport(
        growth=float(c),
        rate=rate,
        holds=bool(np.all(excess <= tolerance)),
        max_violation=float(np.max(excess)),
        min_slack=float(np.min(-excess)),
        samples=int(S.shape[0]),
    )


def liouville_residual(
    mu: DiscreteCharge,
    J: Mollifier,
    t_grid: Sequence[float],
    tests: Sequence[ScalarField],
    grid: float = settings.DEFAULT_GRID,
    dt: float = settings.DEFAULT_DT,
    local_nodes: int = settings.DEFAULT_LOCAL_NODES,
    threads: int = 1,
) -> float:
    """Worst relative change of ``int f d(rho_t)`` over times and test functions.

    ``rho = (|mu| * J) h`` is discretized by the seed quadrature and its nodes
    are pushed along the flow of the mollified direction field. Each entry is
    ``|int f d(rho_t) - int f d(rho)| / int |f| d(rho)``. Negative times use the
    flow of the reversed field.
    """
    check_same_n(mu.n, J.n, "liouville_residual")
    times = [float(t) for t in t_grid]
    if mu.is_empty or not tests or not any(t != 0 for t in times):
        return 0.0

    engine = MollifiedCharge(mu, J)
    seeds = seed_quadrature(engine, grid, local_nodes)
    forward = engine.direction_field()
    flows: Dict[bool, Tuple[np.ndarray, np.ndarray, float]] = {}
    for backward in (False, True):
        reach = max((abs(t) for t in times if (t < 0) == backward and t != 0), default=0.0)
        if reach == 0.0:
            continue
        config = FlowConfig(dt=min(dt, reach), t_max=reach)
        field = forward.negated() if backward else forward
        samples, velocities = integrate_many(seeds.nodes, field, config, threads)
        flows[backward] = (samples, velocities, config.step)

    baseline: List[Tuple[float, float]] = []
    for f in tests:
        values = f.evaluate(seeds.nodes)
        baseline.append((seeds.integrate(values), seeds.integrate(np.abs(values))))

    worst = 0.0
    for t in times:
        if t == 0:
            continue
        samples, velocities, step = flows[t < 0]
        moved, _ = hermite_state(samples, velocities, step, abs(t))
        for f, (initial, scale) in zip(tests, baseline):
            if scale <= 0.0:
                continue
            drift = abs(seeds.integrate(f.evaluate(moved)) - initial) / scale
            worst = max(worst, drift)
    logger.info(f"Liouville residual over {len(times)} times and {len(tests)} tests: {worst:.3e}")
    return worst


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> float:
    """Least-squares convergence order of errors at step sizes shrinking by ``ratio``."""
    logs = np.log(np.asarray(errors, dtype=float))
    levels = np.arange(len(errors)) * math.log(ratio)
    slope = np.polyfit(levels, logs, 1)[0]
    return float(-slope)
