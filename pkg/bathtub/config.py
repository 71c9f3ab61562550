"""
Configuration management for bathtub.
Uses pydantic-settings for environment-based ambient settings and python-dotenv
for the plain `key=value` run configuration files read by the CLI.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from bathtub.core.exceptions import UsageError
from bathtub.schemas.run import RunConfig

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Ambient settings loaded from environment variables (prefix BATHTUB_)."""

    model_config = SettingsConfigDict(
        env_prefix="BATHTUB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    PROJECT_NAME: str = "bathtub"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Monte Carlo replications run on a thread pool of this size (1 = inline)
    WORKERS: int = 1

    # Risk bracket constant and default seed
    DEFAULT_CONSTANT: float = 49.0
    DEFAULT_SEED: int = 0

    # Base directory that relative CLI paths are resolved against
    STORAGE_PATH: str = "."


@lru_cache
def get_settings() -> Settings:
    """
    Get cached settings.
    Uses lru_cache to ensure settings are only loaded once.
    """
    return Settings()


# Config-file spellings that map onto RunConfig field names
_KEY_ALIASES = {
    "in": "input_path",
    "input": "input_path",
    "out": "output_path",
    "output": "output_path",
    "c": "constant",
    "n": "size",
    "t": "size",
}


def _normalize_keys(values: dict[str, Any]) -> dict[str, Any]:
    normalized: dict[str, Any] = {}
    for key, value in values.items():
        name = key.strip().lower().replace("-", "_")
        normalized[_KEY_ALIASES.get(name, name)] = value
    return normalized


def load_run_config(
    config_path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional `key=value` file plus flag overrides.

    Flags win over file values. Keys are case-insensitive; `in` / `out` are
    accepted for the input and output paths.

    Args:
        config_path: Path to a plain-text `key=value` file, or None
        overrides: Values taken from command-line flags; None entries are ignored

    Returns:
        Validated run configuration

    Raises:
        UsageError: If the file is missing or the merged values are invalid
    """
    settings = get_settings()
    merged: dict[str, Any] = {
        "seed": settings.DEFAULT_SEED,
        "constant": settings.DEFAULT_CONSTANT,
    }

    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise UsageError(f"Config file not found: {path}", details={"path": str(path)})
        file_values = {k: v for k, v in dotenv_values(path).items() if v is not None}
        logger.debug(f"Loaded {len(file_values)} key(s) from {path}")
        merged.update(_normalize_keys(file_values))

    if overrides:
        merged.update(_normalize_keys({k: v for k, v in overrides.items() if v is not None}))

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in e.errors()
        ]
        raise UsageError("Invalid run configuration", details={"errors": errors}) from e
