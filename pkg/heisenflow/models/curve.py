"""Sampled horizontal curves and finite curve measures."""

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from heisenflow.models.point import HPoint, symplectic_form
from heisenflow.utils.exceptions import DimensionMismatchError
from heisenflow.utils.validators import as_float_array, group_index, require_positive


def contact_increment(
    h0: np.ndarray, h1: np.ndarray, m0: np.ndarray, m1: np.ndarray
) -> np.ndarray:
    """Vertical gain along the cubic Hermite segment between two samples.

    ``h0, h1`` are horizontal coordinates and ``m0, m1`` the end slopes
    (step times frame velocity). The result is the exact integral of
    ``0.5 * omega(H, H')`` over the interpolant; for a straight step it is
    the chord area ``0.5 * omega(h0, h1)``.
    """
    delta = h1 - h0
    return 0.5 * (
        symplectic_form(h0, h1)
        + symplectic_form(delta, m1 - m0) / 5.0
        - symplectic_form(m0, m1) / 30.0
    )


def hermite_state(
    samples: np.ndarray, velocities: np.ndarray, dt: float, t: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Point and frame velocity at time ``t`` on the cubic Hermite interpolant.

    ``samples`` and ``velocities`` carry the time axis second to last, so a
    batch of trajectories ``(N, M+1, .)`` is interpolated in one call. The
    vertical coordinate comes from the contact rule on the sub-segment, which
    keeps the interpolated point on the same horizontal curve.
    """
    steps = samples.shape[-2] - 1
    position = min(max(t / dt, 0.0), float(steps))
    k = min(int(np.floor(position)), steps - 1)
    s = position - k

    h0 = samples[..., k, :-1]
    h1 = samples[..., k + 1, :-1]
    m0 = dt * velocities[..., k, :]
    m1 = dt * velocities[..., k + 1, :]

    s2, s3 = s * s, s * s * s
    h = (2 * s3 - 3 * s2 + 1) * h0 + (s3 - 2 * s2 + s) * m0
    h = h + (3 * s2 - 2 * s3) * h1 + (s3 - s2) * m1
    slope = (6 * s2 - 6 * s) * h0 + (3 * s2 - 4 * s + 1) * m0
    slope = slope + (6 * s - 6 * s2) * h1 + (3 * s2 - 2 * s) * m1
    z = samples[..., k, -1] + contact_increment(h0, h, s * m0, s * slope)
    return np.concatenate([h, z[..., None]], axis=-1), slope / dt


@dataclass(frozen=True, eq=False)
class HorizontalCurve:
    """A curve on ``[0, horizon]`` sampled at ``t_k = k * horizon / M``.

    ``samples`` has shape ``(M+1, 2n+1)`` and ``velocities`` holds the frame
    coefficients of the derivative at each sample, shape ``(M+1, 2n)``.
    """

    samples: np.ndarray
    velocities: np.ndarray
    horizon: float

    def __post_init__(self):
        samples = as_float_array(self.samples, "curve samples")
        velocities = as_float_array(self.velocities, "curve velocities")
        if samples.ndim != 2 or velocities.ndim != 2:
            raise DimensionMismatchError("curve samples and velocities must be 2-D arrays")
        n = group_index(samples.shape[1])
        if velocities.shape != (samples.shape[0], 2 * n):
            raise DimensionMismatchError(
                f"velocities shape {velocities.shape} does not match samples {samples.shape}"
            )
        if samples.shape[0] < 2:
            raise DimensionMismatchError("a curve needs at least two samples")
        require_positive(self.horizon, "horizon")
        samples = np.array(samples, copy=True)
        velocities = np.array(velocities, copy=True)
        samples.setflags(write=False)
        velocities.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "velocities", velocities)
        object.__setattr__(self, "horizon", float(self.horizon))

    @classmethod
    def constant(cls, point: HPoint, horizon: float, steps: int) -> "HorizontalCurve":
        samples = np.tile(point.coords, (steps + 1, 1))
        return cls(samples, np.zeros((steps + 1, 2 * point.n)), horizon)

    @classmethod
    def from_horizontal_path(
        cls, horizontal: np.ndarray, velocities: np.ndarray, horizon: float, z0: float = 0.0
    ) -> "HorizontalCurve":
        """Lift a sampled horizontal path by accumulating the contact rule from ``z0``."""
        horizontal = np.asarray(horizontal, dtype=float)
        velocities = np.asarray(velocities, dtype=float)
        steps = horizontal.shape[0] - 1
        dt = horizon / steps
        gains = contact_increment(
            horizontal[:-1], horizontal[1:], dt * velocities[:-1], dt * velocities[1:]
        )
        z = z0 + np.concatenate([[0.0], np.cumsum(gains)])
        return cls(np.column_stack([horizontal, z]), velocities, horizon)

    @property
    def n(self) -> int:
        return (self.samples.shape[1] - 1) // 2

    @property
    def steps(self) -> int:
        return self.samples.shape[0] - 1

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def horizontal(self) -> np.ndarray:
        return self.samples[:, : 2 * self.n]

    @property
    def start(self) -> HPoint:
        return HPoint(self.samples[0])

    @property
    def end(self) -> HPoint:
        return HPoint(self.samples[-1])

    @property
    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=1)

    @property
    def max_speed(self) -> float:
        return float(np.max(self.speeds))

    def interpolate(self, times: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """Points ``(T, 2n+1)`` and velocities ``(T, 2n)`` at times in ``[0, horizon]``."""
        states = [hermite_state(self.samples, self.velocities, self.dt, float(t)) for t in times]
        if not states:
            return np.zeros((0, self.samples.shape[1])), np.zeros((0, 2 * self.n))
        return np.stack([p for p, _ in states]), np.stack([v for _, v in states])

    def contact_residuals(self) -> np.ndarray:
        """Per-step residual of the discrete contact identity."""
        h = self.horizontal
        m = self.dt * self.velocities
        gains = contact_increment(h[:-1], h[1:], m[:-1], m[1:])
        return np.diff(self.samples[:, -1]) - gains

    def chord_residuals(self) -> np.ndarray:
        """Per-step residual of the chord-area rule, O(dt**3) for smooth curves."""
        h = self.horizontal
        return np.diff(self.samples[:, -1]) - 0.5 * symplectic_form(h[:-1], h[1:])

    def to_dict(self) -> dict:
        return {
            "l": self.horizon,
            "samples": self.samples,
            "velocities": self.velocities,
        }


@dataclass(frozen=True, eq=False)
class CurveMeasure:
    """A finite positive measure on curves: weighted curves with a common horizon."""

    horizon: float
    curves: Tuple[HorizontalCurve, ...]
    weights: np.ndarray

    def __post_init__(self):
        require_positive(self.horizon, "horizon")
        curves = tuple(self.curves)
        weights = as_float_array(self.weights, "curve weights").reshape(-1)
        if weights.shape[0] != len(curves):
            raise DimensionMismatchError(f"{len(curves)} curves but {weights.shape[0]} weights")
        if np.any(weights <= 0):
            raise DimensionMismatchError("curve weights must be positive")
        for curve in curves:
            if abs(curve.horizon - self.horizon) > 1e-12 * self.horizon:
                raise DimensionMismatchError(
                    f"curve horizon {curve.horizon} differs from measure horizon {self.horizon}"
                )
        weights = np.array(weights, copy=True)
        weights.setflags(write=False)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "curves", curves)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def empty(cls, horizon: float) -> "CurveMeasure":
        return cls(horizon, (), np.zeros(0))

    @classmethod
    def from_entries(
        cls, horizon: float, entries: Sequence[Tuple[HorizontalCurve, float]]
    ) -> "CurveMeasure":
        return cls(horizon, tuple(c for c, _ in entries), np.array([w for _, w in entries]))

    def __len__(self) -> int:
        return len(self.curves)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def n(self) -> int:
        return self.curves[0].n if self.curves else 0

    def entries(self) -> Iterator[Tuple[HorizontalCurve, float]]:
        for curve, weight in zip(self.curves, self.weights):
            yield curve, float(weight)

    def with_weights(self, weights: np.ndarray) -> "CurveMeasure":
        return CurveMeasure(self.horizon, self.curves, weights)
