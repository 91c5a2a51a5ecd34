"""
Configuration Management
----------------------
Process-level settings taken from environment variables (or a `.env` file),
validated with Pydantic. Scenario files are described in `src.models`.
"""

import logging
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

TOOL_VERSION = "0.3.0"


class Config(BaseSettings):
    """Combined configuration"""

    # Server settings
    SERVER_HOST: str = Field(default='0.0.0.0')
    SERVER_PORT: int = Field(default=8000)
    SERVER_WORKERS: int = Field(default=1)
    SERVER_DEBUG: bool = Field(default=False)

    # Logging configuration
    LOG_LEVEL: str = Field(default='INFO')
    LOG_FORMAT: str = Field(default='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    LOG_FILE: Optional[str] = Field(default=None)

    # Harness settings
    OUTPUT_DIR: str = Field(default='results')
    WORKER_THREADS: int = Field(default=1, ge=1)

    # Largest distance x azimuth grid the HTTP service will evaluate
    MAX_PATTERN_CELLS: int = Field(default=40_000, ge=1)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="forbid",  # Disallow extra fields not defined above
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Apply the configured log level, format and destination to the root logger"""
    logging.basicConfig(
        level=level or config.LOG_LEVEL,
        format=config.LOG_FORMAT,
        filename=config.LOG_FILE,
    )


# Instantiate the configuration
config = Config()
