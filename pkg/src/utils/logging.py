"""Loguru sink configuration shared by the CLI and long-running experiments."""

from __future__ import annotations

import sys
from pathlib import Path

from loguru import logger


def configure_logging(level: str = "INFO", log_dir: Path | str | None = None) -> None:
    """
    Replace loguru's default sink with a stderr sink and an optional file sink.

    Args:
        level: Minimum level for both sinks.
        log_dir: Directory for rotating ``qkd_sim_{time}.log`` files. No file sink if None.
    """
    logger.remove()
    logger.add(sys.stderr, level=level)

    if log_dir is not None:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_path / "qkd_sim_{time}.log",
            rotation="10 MB",
            retention="7 days",
            level=level,
        )
