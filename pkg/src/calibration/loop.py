"""
Operating cycle: test and correct the phase, then distribute key, then repeat.

QKD is fully suspended while a fringe scan runs. Each cycle starts with a
calibration as long as a full period remains. The reactive trigger only cuts a
cycle short when the ledger can afford the next scan, so the cumulative duty
cycle at the end of every cycle stays within budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
import polars as pl
from loguru import logger
from scipy.stats import kendalltau

from ..channel import LinkParams, expected_qber
from ..optics import FringeModel, wrap_phases
from ..protocol import CountSummary, SiftedKey, count_session
from ..utils.errors import ParameterError
from ..utils.rng import RngStreams, resolve_streams
from .drift import DEFAULT_DRIFT_RATE, DriftState, advance_drift_path
from .fringe import CalibrationPolicy, calibrate
from .system import QKDSystem

SLICE_SECONDS = 1.0
STATIONARITY_ALPHA = 0.05

OPERATION_LOG_COLUMNS = [
    "t_start",
    "t_end",
    "phase",
    "kind",
    "qber",
    "visibility",
    "correction",
    "duty_cycle_cum",
    "sifted_bits",
    "expected_qber",
]

LOG_SCHEMA = {
    "t_start": pl.Float64,
    "t_end": pl.Float64,
    "phase": pl.Float64,
    "kind": pl.Utf8,
    "qber": pl.Float64,
    "visibility": pl.Float64,
    "correction": pl.Float64,
    "duty_cycle_cum": pl.Float64,
    "sifted_bits": pl.Int64,
    "expected_qber": pl.Float64,
    "drift": pl.Float64,
}


@dataclass(frozen=True)
class OperationLog:
    """
    Interval-by-interval record of an operating run.

    Attributes:
        frame: One row per calibration (``kind == "calib"``) or QKD block
            (``kind == "qkd"``); ``phase`` is the working-point error at the
            end of the interval.
        duty_cycle: Calibration time over total time.
        calibrations: Fringe scans performed.
        pulses: Coded pulses fired during QKD.
        detections: Clicks during QKD.
        sifted_bits: Sifted bits over all QKD blocks.
        errors: Erroneous sifted bits.
        key: Materialized sifted key, if requested.
    """

    frame: pl.DataFrame
    duty_cycle: float
    calibrations: int
    pulses: int
    detections: int
    sifted_bits: int
    errors: int
    key: SiftedKey | None = None

    @property
    def qber(self) -> float:
        return self.errors / self.sifted_bits if self.sifted_bits else float("nan")

    def intervals(self, kind: str) -> pl.DataFrame:
        return self.frame.filter(pl.col("kind") == kind)

    def to_csv_frame(self) -> pl.DataFrame:
        return self.frame.select(OPERATION_LOG_COLUMNS)


@dataclass(frozen=True)
class TrendTest:
    """Kendall tau of a series against its index."""

    tau: float
    p_value: float

    @property
    def stationary(self) -> bool:
        return not self.p_value <= STATIONARITY_ALPHA


def mann_kendall(values: npt.ArrayLike) -> TrendTest:
    """
    Mann-Kendall trend test: Kendall tau of ``values`` against time order.

    NaN entries are dropped. A p-value above 0.05 counts as stationary.

    Raises:
        ParameterError: If fewer than three finite values remain.
    """
    series = np.asarray(values, dtype=float)
    series = series[np.isfinite(series)]
    if series.size < 3:
        raise ParameterError("trend test needs at least 3 values")
    result = kendalltau(np.arange(series.size), series)
    tau, p_value = float(result.statistic), float(result.pvalue)
    if math.isnan(p_value):
        # constant series
        return TrendTest(tau=0.0, p_value=1.0)
    return TrendTest(tau=tau, p_value=p_value)


def _slice_durations(duration: float, slice_seconds: float) -> npt.NDArray[np.float64]:
    n = max(1, math.ceil(duration / slice_seconds - 1e-9))
    durations = np.full(n, slice_seconds)
    durations[-1] = duration - slice_seconds * (n - 1)
    return durations


def _qkd_block(
    system: QKDSystem,
    duration: float,
    streams: RngStreams,
    *,
    slice_seconds: float,
    materialize_key: bool,
) -> tuple[CountSummary, npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Distribute key for ``duration`` seconds; returns counts, drift and phase error per slice."""
    link = system.link
    durations = _slice_durations(duration, slice_seconds)
    offsets, system.drift = advance_drift_path(system.drift, durations)
    pulses = np.rint(durations * link.source.pulse_rate).astype(np.int64)
    summary = count_session(
        link,
        pulses,
        streams,
        drift=offsets,
        bias=system.bias,
        fringe=system.fringe,
        materialize_key=materialize_key,
    )
    system.ledger.charge_qkd(duration)
    phase_errors = wrap_phases(offsets - system.fringe.constructive_phase - system.bias)
    return summary, offsets, phase_errors


def _row(**values: Any) -> dict[str, Any]:
    return {name: values.get(name) for name in LOG_SCHEMA}


def operate(
    link: LinkParams,
    policy: CalibrationPolicy,
    total_time: float,
    rng: np.random.Generator | RngStreams,
    *,
    sigma: float = DEFAULT_DRIFT_RATE,
    fringe: FringeModel | None = None,
    slice_seconds: float = SLICE_SECONDS,
    materialize_key: bool = False,
) -> OperationLog:
    """
    Alternate calibration and QKD phases for ``total_time`` simulated seconds.

    Args:
        link: Link parameters.
        policy: Calibration schedule; ``policy.enabled = False`` runs free.
        total_time: Run length, seconds; must exceed ``policy.period``.
        rng: Generator or party streams.
        sigma: Drift rate, rad / sqrt(s).
        fringe: Central-bin law; defaults to ideal coders behind the fiber birefringence.
        slice_seconds: Time resolution of the drift during QKD.
        materialize_key: Keep the sifted bits of both parties.

    Returns:
        The operation log.

    Raises:
        ParameterError: If ``total_time <= policy.period``.
        PolicyRejectedError: If the policy breaks the duty-cycle budget.
    """
    if total_time <= policy.period:
        raise ParameterError(f"total_time {total_time} must exceed the period {policy.period}")
    if slice_seconds <= 0:
        raise ParameterError("slice_seconds must be > 0")
    policy.check(link.source.pulse_rate)

    streams = resolve_streams(rng)
    system = QKDSystem.aligned(link, streams.drift, sigma=sigma, fringe=fringe)
    scan_time = policy.scan_time(link.source.pulse_rate)
    block_length = policy.trigger_window if policy.qber_trigger is not None else policy.period
    logger.info(
        f"Operating {total_time:.0f} s at {link.fiber.length} km "
        f"(calibration {'on' if policy.enabled else 'off'}, sigma {sigma} rad/sqrt(s))"
    )

    rows: list[dict[str, Any]] = []
    summaries: list[CountSummary] = []
    visibility: float | None = None
    triggered = False

    while total_time - system.clock > 1e-9:
        cycle_start = system.clock
        full_cycle_left = total_time - cycle_start >= policy.period
        if policy.enabled and full_cycle_left:
            t0 = system.clock
            result, correction = calibrate(system, policy, streams.estimation)
            if result is not None:
                visibility = result.visibility
            rows.append(
                _row(
                    t_start=t0,
                    t_end=system.clock,
                    phase=system.working_point_error,
                    kind="calib",
                    qber=None,
                    visibility=None if result is None else result.visibility,
                    correction=correction,
                    duty_cycle_cum=system.ledger.duty_cycle,
                    sifted_bits=0,
                    expected_qber=expected_qber(link, phase_error=system.working_point_error),
                    drift=system.drift.offset,
                )
            )
        triggered = False

        cycle_end = min(cycle_start + policy.period, total_time) if full_cycle_left else total_time
        while cycle_end - system.clock > 1e-9 and not triggered:
            t0 = system.clock
            duration = min(block_length, cycle_end - t0)
            summary, offsets, errors = _qkd_block(
                system,
                duration,
                streams,
                slice_seconds=slice_seconds,
                materialize_key=materialize_key,
            )
            summaries.append(summary)
            block_qber = summary.qber
            rows.append(
                _row(
                    t_start=t0,
                    t_end=system.clock,
                    phase=float(errors[-1]),
                    kind="qkd",
                    qber=None if math.isnan(block_qber) else block_qber,
                    visibility=visibility,
                    correction=0.0,
                    duty_cycle_cum=system.ledger.duty_cycle,
                    sifted_bits=summary.total_sifted,
                    expected_qber=float(
                        np.mean([expected_qber(link, phase_error=float(e)) for e in errors])
                    ),
                    drift=float(offsets[-1]),
                )
            )
            logger.debug(
                f"QKD {t0:.0f}-{system.clock:.0f} s: QBER {block_qber:.4f}, "
                f"working-point error {errors[-1]:+.3f} rad"
            )
            if policy.qber_trigger is not None and block_qber > policy.qber_trigger:
                # A cycle may only be cut short if the next scan still fits the budget.
                triggered = policy.enabled and not system.ledger.would_exceed(scan_time)
                logger.info(
                    f"QBER {block_qber:.4f} over trigger at t = {system.clock:.0f} s"
                    f"{'' if triggered else ', recalibration deferred'}"
                )

    frame = pl.DataFrame(rows, schema=LOG_SCHEMA)
    sifted = sum(s.total_sifted for s in summaries)
    errors_total = sum(s.total_errors for s in summaries)
    key = None
    if materialize_key:
        key = SiftedKey.from_counts(_merge_bits(summaries))
    log = OperationLog(
        frame=frame,
        duty_cycle=system.ledger.duty_cycle,
        calibrations=system.ledger.calibrations,
        pulses=sum(s.total_pulses for s in summaries),
        detections=sum(s.total_clicks for s in summaries),
        sifted_bits=sifted,
        errors=errors_total,
        key=key,
    )
    logger.info(
        f"Operation finished: {log.calibrations} calibrations, duty cycle {log.duty_cycle:.3f}, "
        f"QBER {log.qber:.4f} over {sifted:,} sifted bits"
    )
    return log


def _merge_bits(summaries: list[CountSummary]) -> CountSummary:
    def cat(name: str) -> Any:
        return np.concatenate([getattr(s, name) for s in summaries])

    return CountSummary(
        pulses=cat("pulses"),
        clicks=cat("clicks"),
        signal_clicks=cat("signal_clicks"),
        dark_clicks=cat("dark_clicks"),
        sifted=cat("sifted"),
        errors=cat("errors"),
        alice_bits=cat("alice_bits"),
        bob_bits=cat("bob_bits"),
    )


def uncorrected_trace(
    link: LinkParams,
    duration: float,
    rng: np.random.Generator,
    *,
    sigma: float = DEFAULT_DRIFT_RATE,
    step: float = SLICE_SECONDS,
) -> pl.DataFrame:
    """
    Drift and analytic QBER of a link left at its factory working point.

    Returns:
        Columns ``t, drift, expected_qber`` sampled every ``step`` seconds.
    """
    if duration <= 0 or step <= 0:
        raise ParameterError("duration and step must be > 0")
    durations = _slice_durations(duration, step)
    offsets, _ = advance_drift_path(DriftState.start(rng, sigma), durations)
    # Factory bias is fixed, so the working-point error is the drift itself.
    qber = [expected_qber(link, phase_error=float(offset)) for offset in offsets]
    return pl.DataFrame(
        {"t": np.cumsum(durations), "drift": offsets, "expected_qber": qber},
        schema={"t": pl.Float64, "drift": pl.Float64, "expected_qber": pl.Float64},
    )
