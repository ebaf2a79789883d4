"""Brackets for the Carnot-Carathéodory distance.

In ℍ¹ the shortest horizontal curves project to circular arcs. For
``g = p^-1 q`` with chord ``c = |g_h|`` and vertical gain ``z = g_z`` the arc
of angle ``theta`` has length ``c theta / (2 sin(theta / 2))`` and encloses
area ``c^2 (theta - sin theta) / (8 sin^2(theta / 2))``, increasing on
``(0, 2 pi)``. Solving the area equation brackets the distance. In higher
dimension only the homogeneous-norm bracket is returned.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from heisenflow.models.point import HPoint
from heisenflow.services.group_service import group_inv, group_mul, homogeneous_norm
from heisenflow.utils.logger import get_logger
from heisenflow.utils.validators import check_same_n

logger = get_logger(__name__)

_THETA_MIN = 1e-9
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DistanceBudget:
    """Resolution parameters of the arc search."""

    xtol: float = 1e-10
    maxiter: int = 200
    widen_steps: int = 60


@dataclass(frozen=True)
class DistanceBracket:
    lower: float
    upper: float
    converged: bool = True

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


@dataclass(frozen=True)
class BilipschitzConstants:
    """``lower_ratio <= ||g|| / d_CC(0, g) <= upper_ratio`` for every g."""

    lower_ratio: float
    upper_ratio: float


def _unit_area(theta: np.ndarray) -> np.ndarray:
    """Arc area for unit chord."""
    theta = np.asarray(theta, dtype=float)
    small = theta < 1e-3
    numerator = np.where(small, theta**3 / 6.0 - theta**5 / 120.0, theta - np.sin(theta))
    return numerator / (8.0 * np.sin(theta / 2.0) ** 2)


def _unit_length(theta: np.ndarray) -> np.ndarray:
    """Arc length for unit chord."""
    theta = np.asarray(theta, dtype=float)
    half = theta / 2.0
    return np.where(theta < 1e-8, 1.0 + theta**2 / 24.0, half / np.maximum(np.sin(half), 1e-300))


@lru_cache(maxsize=1)
def bilipschitz_constants() -> BilipschitzConstants:
    """Extremes of ``||g|| / d_CC(0, g)`` over the arc family, computed once.

    The ratio depends on the arc angle only. Its supremum 1 is approached by
    straight segments; the infimum is taken on a fine angle grid, including
    the full circle, and shrunk by 1e-3.
    """
    theta = np.linspace(1e-4, _TWO_PI - 1e-6, 200001)
    area = _unit_area(theta)
    length = _unit_length(theta)
    ratios = np.sqrt(np.sqrt(1.0 + area**2)) / length
    circle_ratio = 1.0 / (2.0 * math.sqrt(math.pi))
    lower = min(float(ratios.min()), circle_ratio) * (1.0 - 1e-3)
    upper = max(float(ratios.max()), 1.0)
    logger.debug(f"Bilipschitz constants: lower={lower:.6f}, upper={upper:.6f}")
    return BilipschitzConstants(lower_ratio=lower, upper_ratio=upper)


def norm_bracket(p: HPoint, q: HPoint) -> DistanceBracket:
    """Bracket from the homogeneous norm and the bilipschitz constants."""
    g = group_mul(group_inv(p), q)
    norm = homogeneous_norm(g)
    constants = bilipschitz_constants()
    chord = float(np.linalg.norm(g.horizontal))
    lower = max(norm / constants.upper_ratio, chord)
    upper = norm / constants.lower_ratio
    return DistanceBracket(lower=lower, upper=max(upper, lower))


def cc_distance_estimate(
    p: HPoint, q: HPoint, budget: DistanceBudget = DistanceBudget()
) -> DistanceBracket:
    """Bracket ``lower <= d_CC(p, q) <= upper``.

    Failures of the arc search degrade to the norm bracket with
    ``converged=False``; they are never raised.
    """
    check_same_n(p.n, q.n, "cc_distance_estimate")
    if p.n != 1:
        return norm_bracket(p, q)

    g = group_mul(group_inv(p), q)
    chord = float(np.linalg.norm(g.horizontal))
    gain = abs(g.z)

    if chord == 0.0 and gain == 0.0:
        return DistanceBracket(0.0, 0.0)
    if gain == 0.0:
        return DistanceBracket(chord, chord)
    if chord == 0.0:
        circle = 2.0 * math.sqrt(math.pi * gain)
        return DistanceBracket(circle, circle)

    target = gain / chord**2
    try:
        lo, hi = _bracket_theta(target, budget)
    except (ValueError, RuntimeError) as exc:
        logger.warning(f"Arc search did not converge ({exc}); using norm bracket")
        fallback = norm_bracket(p, q)
        return DistanceBracket(fallback.lower, fallback.upper, converged=False)

    lower = max(chord, chord * float(_unit_length(lo)))
    upper = chord * float(_unit_length(hi))
    fallback = norm_bracket(p, q)
    return DistanceBracket(max(lower, fallback.lower), min(upper, fallback.upper))


def _bracket_theta(target: float, budget: DistanceBudget) -> tuple[float, float]:
    """Angles ``lo <= theta* <= hi`` with ``unit_area(theta*) = target``."""

    def residual(theta: float) -> float:
        return float(_unit_area(theta)) - target

    if residual(_THETA_MIN) >= 0.0:
        # gain below what the smallest tracked arc encloses; distance is pinned by monotonicity
        return 0.0, _THETA_MIN

    gap = 1e-3
    upper_theta = _TWO_PI - gap
    for _ in range(budget.widen_steps):
        if residual(upper_theta) > 0.0:
            break
        gap /= 2.0
        upper_theta = _TWO_PI - gap
    else:
        raise RuntimeError(f"no upper angle found for area ratio {target:.3e}")

    theta = brentq(residual, _THETA_MIN, upper_theta, xtol=budget.xtol, maxiter=budget.maxiter)
    lo = max(_THETA_MIN, theta - 2.0 * budget.xtol)
    hi = min(upper_theta, theta + 2.0 * budget.xtol)
    for _ in range(budget.widen_steps):
        if residual(lo) <= 0.0 <= residual(hi):
            return lo, hi
        lo = max(_THETA_MIN, theta - 2.0 * (theta - lo))
        hi = min(upper_theta, theta + 2.0 * (hi - theta))
    raise RuntimeError("root bracket could not be certified")
