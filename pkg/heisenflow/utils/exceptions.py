"""Domain errors raised by heisenflow."""

from typing import Optional, Sequence


class HeisenflowError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(HeisenflowError, ValueError):
    """Coordinate or coefficient lengths disagree with the group index n."""


class InvalidParameterError(HeisenflowError, ValueError):
    """A numerical parameter is outside its admissible range."""


class HorizonExceededError(HeisenflowError):
    """A flow was queried beyond its configured horizon."""

    def __init__(self, t: float, t_max: float):
        self.t = t
        self.t_max = t_max
        super().__init__(f"|t|={abs(t):.6g} exceeds the flow horizon t_max={t_max:.6g}")


class SpeedBoundError(HeisenflowError):
    """A field evaluated above unit speed along a trajectory."""

    def __init__(self, point: Sequence[float], speed: float):
        self.point = [float(c) for c in point]
        self.speed = float(speed)
        coords = ", ".join(f"{c:.6g}" for c in self.point)
        super().__init__(f"field speed {self.speed:.12g} > 1 at ({coords})")


class GridMismatchError(HeisenflowError):
    """Two curves do not share a horizon and sample grid."""


class NotSolenoidalError(HeisenflowError):
    """The charge has a divergence residual above the solenoidal tolerance."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"divergence residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


class EmptyChargeError(HeisenflowError):
    """A non-empty charge produced no seed nodes."""


class NoPlaneContactError(HeisenflowError):
    """A lifted curve never meets the base plane."""


class InputError(HeisenflowError):
    """A file could not be parsed or failed schema validation."""

    def __init__(self, message: str, path: Optional[str] = None, location: Optional[str] = None):
        self.message = message
        self.path = path
        self.location = location
        where = path or "<input>"
        if location:
            where = f"{where} ({location})"
        super().__init__(f"{where}: {message}")
