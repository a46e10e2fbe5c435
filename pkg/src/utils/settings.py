"""Process-level settings read from the environment (and ``.env``)."""

from __future__ import annotations

from pathlib import Path

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Knobs that change how the simulator runs, never what it simulates."""

    model_config = SettingsConfigDict(env_prefix="QKDSIM_", extra="ignore")

    log_level: str = "INFO"
    log_dir: Path | None = None
    output_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)


def load_settings() -> RuntimeSettings:
    """Load ``.env`` (if present) and build settings from the environment."""
    load_dotenv()
    return RuntimeSettings()
