"""Phase drift, fringe calibration and the test-then-distribute operating cycle."""

from .drift import DEFAULT_DRIFT_RATE, DriftState, advance_drift, advance_drift_path
from .fringe import (
    CalibrationPolicy,
    CalibrationResult,
    calibrate,
    fit_fringe,
    fringe_scan,
    linearize_counts,
)
from .loop import (
    LOG_SCHEMA,
    OPERATION_LOG_COLUMNS,
    SLICE_SECONDS,
    OperationLog,
    TrendTest,
    mann_kendall,
    operate,
    uncorrected_trace,
)
from .system import MAX_DUTY_CYCLE, CalibrationLedger, QKDSystem

__all__ = [
    "DEFAULT_DRIFT_RATE",
    "LOG_SCHEMA",
    "MAX_DUTY_CYCLE",
    "OPERATION_LOG_COLUMNS",
    "SLICE_SECONDS",
    "CalibrationLedger",
    "CalibrationPolicy",
    "CalibrationResult",
    "DriftState",
    "OperationLog",
    "QKDSystem",
    "TrendTest",
    "advance_drift",
    "advance_drift_path",
    "calibrate",
    "fit_fringe",
    "fringe_scan",
    "linearize_counts",
    "mann_kendall",
    "operate",
    "uncorrected_trace",
]
