"""Application configuration management."""

from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from heisenflow.utils.validators import validate_json_file


class Settings(BaseSettings):
    """Process-wide defaults loaded from environment variables (prefix ``HEISENFLOW_``)."""

    # Application
    APP_NAME: str = "heisenflow"
    VERSION: str = "0.1.0"
    LOG_LEVEL: str = "INFO"

    # Numerics
    DEFAULT_EPSILON: float = 0.1
    DEFAULT_GRID: float = 0.02
    DEFAULT_DT: float = 0.01
    DEFAULT_HORIZON: float = 1.0
    DEFAULT_LOCAL_NODES: int = 6
    FD_STEP: float = 1e-5
    DENSITY_CUTOFF: float = 1e-12
    SPEED_TOLERANCE: float = 1e-9

    # Thresholds
    SOLENOIDAL_TOLERANCE: float = 1e-2
    VERTICAL_THRESHOLD: float = 0.9

    # Verification tolerances
    PAIRING_TOLERANCE: float = 2e-2
    MASS_TOLERANCE: float = 1e-3
    VARIATION_TOLERANCE: float = 2e-2
    SUPPORT_TOLERANCE: float = 1e-3
    SLOW_FRACTION_TOLERANCE: float = 0.05

    model_config = SettingsConfigDict(
        env_prefix="HEISENFLOW_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()


class RunConfig(BaseModel):
    """Configuration of one command-line run.

    The JSON key ``"l"`` holds the curve horizon. Every numerical knob has a
    default taken from :data:`settings`.
    """

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    n: int = Field(ge=1)
    horizon: float = Field(default_factory=lambda: settings.DEFAULT_HORIZON, gt=0, alias="l")
    epsilon: float = Field(default_factory=lambda: settings.DEFAULT_EPSILON, gt=0)
    epsilon_schedule: Optional[List[float]] = None
    grid: float = Field(default_factory=lambda: settings.DEFAULT_GRID, gt=0)
    dt: float = Field(default_factory=lambda: settings.DEFAULT_DT, gt=0)
    local_nodes: int = Field(default_factory=lambda: settings.DEFAULT_LOCAL_NODES, ge=2)

    solenoidal_tolerance: float = Field(
        default_factory=lambda: settings.SOLENOIDAL_TOLERANCE, gt=0
    )
    vertical_threshold: float = Field(
        default_factory=lambda: settings.VERTICAL_THRESHOLD, gt=0, le=1
    )
    plane_tolerance: Optional[float] = Field(default=None, gt=0)
    segment_count: Optional[int] = Field(default=None, ge=1)
    divergence_grid: Optional[float] = Field(default=None, gt=0)

    pairing_tolerance: float = Field(default_factory=lambda: settings.PAIRING_TOLERANCE, gt=0)
    mass_tolerance: float = Field(default_factory=lambda: settings.MASS_TOLERANCE, gt=0)
    variation_tolerance: float = Field(
        default_factory=lambda: settings.VARIATION_TOLERANCE, gt=0
    )
    support_tolerance: float = Field(default_factory=lambda: settings.SUPPORT_TOLERANCE, ge=0)
    slow_fraction_tolerance: float = Field(
        default_factory=lambda: settings.SLOW_FRACTION_TOLERANCE, ge=0
    )

    output_dir: str = "out"
    jitter_seed: Optional[int] = None
    threads: int = Field(default=1, ge=1)

    @field_validator("epsilon_schedule")
    @classmethod
    def _check_schedule(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is None:
            return value
        if not value:
            raise ValueError("epsilon_schedule must not be empty")
        if any(eps <= 0 for eps in value):
            raise ValueError("epsilon_schedule entries must be positive")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("epsilon_schedule must be strictly decreasing")
        return value

    @model_validator(mode="after")
    def _check_steps(self) -> "RunConfig":
        if self.dt > self.horizon:
            raise ValueError(f"dt={self.dt} exceeds the horizon l={self.horizon}")
        return self

    @property
    def schedule(self) -> List[float]:
        """The epsilon schedule, falling back to the single ``epsilon``."""
        return list(self.epsilon_schedule) if self.epsilon_schedule else [self.epsilon]

    def to_json_dict(self) -> dict:
        """Serialize with the on-disk key names."""
        return self.model_dump(by_alias=True)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a run configuration file.

    Args:
        path: JSON file path

    Returns:
        Validated RunConfig

    Raises:
        InputError: If the file is missing, not JSON, or fails validation
    """
    return validate_json_file(path, RunConfig, "config")
