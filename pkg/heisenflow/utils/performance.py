"""Timing of pipeline stages.

Durations are only logged; they never reach output files.
"""

import time
from dataclasses import dataclass
from typing import Dict, Optional

from heisenflow.utils.formatters import format_duration
from heisenflow.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class StageStats:
    """Accumulated durations of one named stage."""

    calls: int = 0
    total: float = 0.0
    fastest: float = float("inf")
    slowest: float = 0.0
    failures: int = 0

    @property
    def mean(self) -> float:
        return self.total / self.calls if self.calls else 0.0

    def add(self, duration: float, failed: bool = False) -> None:
        self.calls += 1
        self.total += duration
        self.fastest = min(self.fastest, duration)
        self.slowest = max(self.slowest, duration)
        if failed:
            self.failures += 1


class PerformanceMonitor:
    """Registry of stage timings."""

    def __init__(self):
        self._stages: Dict[str, StageStats] = {}

    def record(self, name: str, duration: float, error: bool = False) -> None:
        """Add one timed run of ``name``; ``error`` marks a block that raised."""
        self._stages.setdefault(name, StageStats()).add(duration, error)

    def get_stats(self, name: str) -> Optional[StageStats]:
        return self._stages.get(name)

    def stages(self) -> Dict[str, StageStats]:
        return dict(self._stages)

    def log_summary(self) -> None:
        """One DEBUG line per recorded stage."""
        for name, stats in self._stages.items():
            logger.debug(
                f"{name}: {stats.calls} run(s), mean {format_duration(stats.mean)}, "
                f"slowest {format_duration(stats.slowest)}"
            )

    def reset(self) -> None:
        self._stages.clear()


# Shared by every Timer in the process
_monitor = PerformanceMonitor()


def get_monitor() -> PerformanceMonitor:
    return _monitor


class Timer:
    """Context manager that logs the duration of a block and records it in the monitor.

    Args:
        name: Stage name
        log: Whether to log the duration at INFO
    """

    def __init__(self, name: str, log: bool = True):
        self.name = name
        self.log = log
        self.start_time: Optional[float] = None
        self.duration: Optional[float] = None

    def __enter__(self) -> "Timer":
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.duration = time.perf_counter() - self.start_time
        if self.log:
            logger.info(f"{self.name} took {format_duration(self.duration)}")
        _monitor.record(self.name, self.duration, exc_type is not None)

    def elapsed(self) -> float:
        """Seconds so far; the final duration once the block has exited."""
        if self.duration is not None:
            return self.duration
        if self.start_time is None:
            return 0.0
        return time.perf_counter() - self.start_time
