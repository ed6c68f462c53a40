# app/config.py

from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    """Process settings loaded from OCEAN_* environment variables or .env."""

    # App
    app_name: str = "OCEAN Simulator"
    app_env: str = "development"
    debug: bool = True
    log_level: str = "INFO"

    # Harness
    output_dir: str = "results"
    sweep_workers: int = 1
    write_traces: bool = False
    default_runs_per_point: int = 20

    # HTTP surface
    api_max_sweep_runs: int = 200

    class Config:
        env_prefix = "OCEAN_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Cached settings instance."""
    return Settings()
