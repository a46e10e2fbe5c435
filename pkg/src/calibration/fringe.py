"""
Fringe scan and working-point fit.

Bob steps his modulator over one full period while Alice sends unmodulated
test pulses; a sinusoid fitted to the counts gives the bias that puts matched
equal bits back on the constructive point.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import lstsq

from ..channel import gate_click_probability, signal_click_probabilities
from ..optics import scan_phases, wrap_phase
from ..optics.interferometer import MIN_SCAN_POINTS
from ..utils.errors import CalibrationFailedError, ParameterError, PolicyRejectedError
from .drift import advance_drift_path
from .system import MAX_DUTY_CYCLE, QKDSystem

# Relative fringe amplitude below which the fit is treated as flat.
_FLAT_TOLERANCE = 1e-9


class CalibrationPolicy(BaseModel):
    """
    How often and how thoroughly the working point is re-measured.

    Attributes:
        period: Seconds per calibration + QKD cycle.
        scan_points: Modulator settings per scan.
        pulses_per_point: Test pulses fired at each setting.
        qber_trigger: Calibrate early when a QKD block exceeds this QBER.
        trigger_window: Seconds per QKD block when the trigger is armed.
        min_visibility: Fits below this visibility keep the previous bias.
        enabled: Set to False to run without any calibration.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    period: float = Field(default=45.0, gt=0)
    scan_points: int = Field(default=16, ge=MIN_SCAN_POINTS)
    pulses_per_point: int = Field(default=225_000, ge=1)
    qber_trigger: float | None = Field(default=None, gt=0, le=0.5)
    trigger_window: float = Field(default=10.0, gt=0)
    min_visibility: float = Field(default=0.2, ge=0, lt=1)
    enabled: bool = True

    def scan_time(self, pulse_rate: float) -> float:
        return self.scan_points * self.pulses_per_point / pulse_rate

    def duty_cycle(self, pulse_rate: float) -> float:
        return self.scan_time(pulse_rate) / self.period

    def check(self, pulse_rate: float) -> None:
        """
        Reject a policy whose scans alone would break the duty-cycle budget.

        Raises:
            PolicyRejectedError: If scan time / period exceeds 0.10.
        """
        if not self.enabled:
            return
        duty = self.duty_cycle(pulse_rate)
        if duty > MAX_DUTY_CYCLE:
            raise PolicyRejectedError(
                f"duty cycle {duty:.3f} exceeds {MAX_DUTY_CYCLE} "
                f"(scan {self.scan_time(pulse_rate):.2f} s per {self.period} s period)"
            )


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of one fringe fit."""

    offset: float
    visibility: float
    residual: float
    pulses_consumed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.visibility <= 1.0:
            raise ParameterError(f"visibility must lie in [0, 1], got {self.visibility}")
        object.__setattr__(self, "offset", wrap_phase(self.offset))


def fringe_scan(
    system: QKDSystem, policy: CalibrationPolicy, rng: np.random.Generator
) -> list[tuple[float, int]]:
    """
    Step Bob's modulator over one period and count test-pulse clicks.

    Drift keeps running during the scan and the dwell time is charged to the
    system's calibration ledger.

    Args:
        system: Link under calibration; its drift and ledger advance.
        policy: Scan resolution and dwell.
        rng: Generator for the photon counts.

    Returns:
        ``(bob_phase, clicks)`` per setting, phases in [0, 2 pi).
    """
    link = system.link
    phases = scan_phases(policy.scan_points)
    dwell = policy.pulses_per_point / link.source.pulse_rate
    offsets, system.drift = advance_drift_path(system.drift, np.full(phases.size, dwell))

    # Alice idles at phase 0; unmodulated pulses carry no coding error.
    p_norm = system.fringe.normalized(offsets - phases)
    p_signal = signal_click_probabilities(link, p_norm, mu=link.source.mu_unmodulated)
    p_click = gate_click_probability(p_signal, link.detector.dark_prob)
    counts = rng.binomial(policy.pulses_per_point, p_click)

    system.ledger.charge_calibration(dwell * phases.size)
    logger.debug(f"Fringe scan: {int(counts.sum()):,} clicks over {phases.size} settings")
    return [(float(phase), int(count)) for phase, count in zip(phases, counts)]


def linearize_counts(
    counts: npt.ArrayLike, pulses_per_point: int, dark_prob: float
) -> npt.NDArray[np.float64]:
    """
    Convert click counts to mean detected photons per pulse.

    Undoes the exponential saturation of the detector and removes the dark
    background, so the result follows the interference law linearly.
    """
    k = np.asarray(counts, dtype=float)
    if pulses_per_point <= 0:
        raise ParameterError("pulses_per_point must be > 0")
    ratio = np.clip(k / pulses_per_point, 0.0, 1.0 - 0.5 / pulses_per_point)
    return -np.log1p(-ratio) + np.log1p(-dark_prob)


def fit_fringe(
    samples: Sequence[tuple[float, float]], *, pulses_consumed: int = 0
) -> CalibrationResult:
    """
    Least-squares fit of ``c0 + c1 cos(phi) + c2 sin(phi)``.

    Args:
        samples: ``(phase, value)`` pairs covering one period.
        pulses_consumed: Test pulses behind the samples, for bookkeeping.

    Returns:
        Offset ``atan2(c2, c1)``, the setting of maximum transmission, and
        visibility ``hypot(c1, c2) / c0`` clipped to [0, 1].

    Raises:
        ParameterError: If fewer than eight samples are given.
        CalibrationFailedError: If ``c0 <= 0`` or the data show no fringe.
    """
    if len(samples) < MIN_SCAN_POINTS:
        raise ParameterError(f"need at least {MIN_SCAN_POINTS} samples, got {len(samples)}")
    phases = np.array([s[0] for s in samples], dtype=float)
    values = np.array([s[1] for s in samples], dtype=float)

    design = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    coef, _, rank, _ = lstsq(design, values)
    if rank < 3:
        raise CalibrationFailedError("scan phases do not resolve a sinusoid")
    c0, c1, c2 = (float(c) for c in coef)
    if c0 <= 0:
        raise CalibrationFailedError(f"fringe mean {c0:.3g} is not positive")
    amplitude = float(np.hypot(c1, c2))
    if amplitude <= _FLAT_TOLERANCE * c0:
        raise CalibrationFailedError("no usable fringe: visibility 0")

    residual = float(np.sqrt(np.mean((values - design @ coef) ** 2)))
    return CalibrationResult(
        offset=float(np.arctan2(c2, c1)),
        visibility=min(amplitude / c0, 1.0),
        residual=residual,
        pulses_consumed=pulses_consumed,
    )


def calibrate(
    system: QKDSystem, policy: CalibrationPolicy, rng: np.random.Generator
) -> tuple[CalibrationResult | None, float]:
    """
    Scan, fit and move Bob's bias to the fitted constructive setting.

    Returns:
        The fit (``None`` when it failed or fell below ``min_visibility``) and
        the correction applied to the bias.
    """
    samples = fringe_scan(system, policy, rng)
    system.ledger.calibrations += 1
    linear = linearize_counts(
        [count for _, count in samples], policy.pulses_per_point, system.link.detector.dark_prob
    )
    try:
        result = fit_fringe(
            list(zip([phase for phase, _ in samples], linear.tolist())),
            pulses_consumed=policy.pulses_per_point * policy.scan_points,
        )
    except CalibrationFailedError as e:
        logger.warning(f"Calibration failed, keeping bias {system.bias:+.3f}: {e}")
        return None, 0.0

    if result.visibility < policy.min_visibility:
        logger.warning(
            f"Fringe visibility {result.visibility:.3f} below {policy.min_visibility}, "
            "keeping previous bias"
        )
        return None, 0.0

    correction = wrap_phase(result.offset - system.bias)
    system.bias = result.offset
    return result, correction
