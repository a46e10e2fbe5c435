"""Faint-pulse source, fiber loss, gated detection and the analytic QBER model."""

from .detection import (
    ORIGIN_CODES,
    ClickOrigin,
    ClickOutcome,
    coded_click_probabilities,
    expected_qber,
    gate_click_probability,
    matched_click_probabilities,
    mean_click_probability,
    sample_click,
    sample_clicks,
    secure_distance,
    signal_click_probabilities,
    signal_click_probability,
)
from .link import (
    FIELD_EXTRA_ERROR,
    IDEAL_CENTRAL_CEILING,
    DetectorModel,
    FiberSpec,
    LinkParams,
    SourceModel,
    transmittance,
)

__all__ = [
    "FIELD_EXTRA_ERROR",
    "IDEAL_CENTRAL_CEILING",
    "ORIGIN_CODES",
    "ClickOrigin",
    "ClickOutcome",
    "DetectorModel",
    "FiberSpec",
    "LinkParams",
    "SourceModel",
    "coded_click_probabilities",
    "expected_qber",
    "gate_click_probability",
    "matched_click_probabilities",
    "mean_click_probability",
    "sample_click",
    "sample_clicks",
    "secure_distance",
    "signal_click_probabilities",
    "signal_click_probability",
    "transmittance",
]
