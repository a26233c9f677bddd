"""Configuration management for metasense."""

from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="METASENSE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging
    log_level: str = "INFO"
    log_file: Optional[Path] = None

    # Reference tables; None means the copies bundled with the package
    fixture_dir: Optional[Path] = None

    # Resonance detection
    notch_threshold_db: float = -10.0
    notch_min_separation_hz: float = 50e6
    q_offset_db: float = 3.0

    # Network sweeps
    sweep_points: int = Field(default=1001, ge=2)

    # Circuit fitting
    fit_max_iters: int = Field(default=4000, ge=1)
    fit_tol: float = Field(default=1e-10, gt=0)
    fit_restarts: int = Field(default=3, ge=0)
    fit_seed: int = 0

    # Output
    output_format: str = "csv"


settings = Settings()
