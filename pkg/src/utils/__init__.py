"""Cross-cutting helpers: errors, logging, seeded random streams, settings."""

from .errors import (
    CalibrationFailedError,
    ConfigError,
    KeyExhaustedError,
    NoDataError,
    ParameterError,
    PolicyRejectedError,
    QKDSimError,
    UndefinedVisibilityError,
)
from .logging import configure_logging
from .rng import RngStreams, resolve_streams
from .settings import RuntimeSettings, load_settings

__all__ = [
    "CalibrationFailedError",
    "ConfigError",
    "KeyExhaustedError",
    "NoDataError",
    "ParameterError",
    "PolicyRejectedError",
    "QKDSimError",
    "UndefinedVisibilityError",
    "configure_logging",
    "RngStreams",
    "resolve_streams",
    "RuntimeSettings",
    "load_settings",
]
