"""Configuration management for submax."""

from functools import lru_cache
from typing import Literal

from pydantic import NonNegativeInt, PositiveFloat, PositiveInt, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and benchmark settings loaded from SUBMAX_* environment variables."""

    # Exhaustive enumeration caps (ground-set sizes)
    max_brute_m: PositiveInt = 24  # SUBMAX_MAX_BRUTE_M
    max_local_maxima_m: PositiveInt = 20
    max_exhaustive_submodular_m: PositiveInt = 14
    max_exhaustive_local_max_m: PositiveInt = 16

    # Verification
    verify_max_m: NonNegativeInt = 12  # bench verifies cells up to this size
    sampled_trials: PositiveInt = 10_000
    float_tolerance: float = 1e-9

    # Algorithm defaults
    default_epsilon: PositiveFloat = 0.05
    default_nrounds: NonNegativeInt = 2

    # Bench execution
    cell_timeout: PositiveInt = 600  # seconds per (instance, algorithm, epsilon) cell
    workers: PositiveInt = 4

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    debug: bool = False

    @field_validator("float_tolerance")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        if v < 0 or v > 1e-3:
            raise ValueError("float_tolerance must lie in [0, 1e-3]")
        return v

    model_config = SettingsConfigDict(
        env_prefix="SUBMAX_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
