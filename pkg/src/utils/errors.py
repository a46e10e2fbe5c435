"""
Exception hierarchy for the QKD simulator.

Every error raised on purpose by the library derives from ``QKDSimError`` so
callers (and the CLI) can tell simulator failures apart from bugs.
"""

from __future__ import annotations


class QKDSimError(Exception):
    """Base class for all simulator errors."""


class ParameterError(QKDSimError, ValueError):
    """An argument is outside its documented range."""


class UndefinedVisibilityError(QKDSimError):
    """A fringe scan carries no light at all, so visibility is undefined."""


class CalibrationFailedError(QKDSimError):
    """The fringe fit produced no usable working point."""


class NoDataError(QKDSimError):
    """An estimator was handed an empty key or sample."""


class KeyExhaustedError(QKDSimError):
    """Not enough key material left for the requested one-time pad."""


class PolicyRejectedError(ParameterError):
    """A calibration policy would spend more than the allowed duty cycle."""


class ConfigError(QKDSimError):
    """
    Configuration file could not be parsed or validated.

    Attributes:
        line: 1-based line number of a syntax error, when known.
        field: Dotted ``section.key`` name of the offending value, when known.
    """

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        elif field is not None:
            prefix = f"{field}: "
        super().__init__(f"{prefix}{message}")
