"""
Configuration Module

Reads SPEEDUPLAB_* settings from the environment (and an optional .env
file) for the limit-estimation schedule, classification tolerance, logging
and the HTTP server.
"""

import logging
from typing import Optional

from pydantic import ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from speeduplab.errors import ConfigurationError

logger = logging.getLogger(__name__)

# A schedule needs at least this many points for Aitken plus the
# divergence window.
MIN_SCHEDULE_POINTS = 6

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Settings(BaseSettings):
    """Runtime settings, overridable with SPEEDUPLAB_<FIELD> variables"""

    model_config = SettingsConfigDict(
        env_prefix="SPEEDUPLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    schedule_min_exp: int = 4
    schedule_max_exp: int = 40
    limit_tol: float = 1e-6
    min_consecutive: int = 3
    zero_tolerance: float = 1e-3
    log_level: str = "WARNING"
    api_host: str = "0.0.0.0"
    api_port: int = 8000

    @field_validator("schedule_min_exp")
    @classmethod
    def _min_exp_at_least_one(cls, value: int) -> int:
        # p = 2^1 is the smallest processor count the schedule admits
        if value < 1:
            raise ValueError("schedule_min_exp must be >= 1")
        return value

    @field_validator("limit_tol", "zero_tolerance")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tolerances must be positive")
        return value

    @field_validator("min_consecutive")
    @classmethod
    def _min_consecutive_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("min_consecutive must be >= 1")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"unknown log level: {value}")
        return level

    @model_validator(mode="after")
    def _schedule_long_enough(self) -> "Settings":
        points = self.schedule_max_exp - self.schedule_min_exp + 1
        if points < MIN_SCHEDULE_POINTS:
            raise ValueError(
                f"schedule 2^{self.schedule_min_exp}..2^{self.schedule_max_exp} "
                f"has {points} points, need at least {MIN_SCHEDULE_POINTS}"
            )
        return self


def load_settings() -> Settings:
    """
    Build settings from the current environment

    Returns:
        Settings: Freshly validated settings

    Raises:
        ConfigurationError: If any SPEEDUPLAB_* value is invalid
    """
    try:
        return Settings()
    except ValidationError as e:
        logger.error(f"[CONFIG] ✗ Invalid configuration: {e}")
        raise ConfigurationError(f"Invalid configuration: {e}") from e


# Global singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the process-wide settings, loading them on first use"""
    global _settings
    if _settings is None:
        _settings = load_settings()
        logger.info(
            f"[CONFIG] Schedule 2^{_settings.schedule_min_exp}..2^{_settings.schedule_max_exp}, "
            f"tol={_settings.limit_tol}"
        )
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next get_settings() re-reads the environment"""
    global _settings
    _settings = None


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging on stderr for an entry point"""
    logging.basicConfig(
        level=level or get_settings().log_level,
        format=LOG_FORMAT,
    )
