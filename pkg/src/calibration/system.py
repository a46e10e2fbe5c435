"""Mutable state of a running link: working point, drift and time accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channel import LinkParams
from ..optics import FringeModel, link_fringe, wrap_phase
from .drift import DEFAULT_DRIFT_RATE, DriftState, advance_drift

MAX_DUTY_CYCLE = 0.10


@dataclass
class CalibrationLedger:
    """Simulated seconds spent calibrating versus distributing key."""

    calibration_time: float = 0.0
    qkd_time: float = 0.0
    calibrations: int = 0

    @property
    def elapsed(self) -> float:
        return self.calibration_time + self.qkd_time

    @property
    def duty_cycle(self) -> float:
        return self.calibration_time / self.elapsed if self.elapsed > 0 else 0.0

    def charge_calibration(self, seconds: float) -> None:
        self.calibration_time += seconds

    def charge_qkd(self, seconds: float) -> None:
        self.qkd_time += seconds

    def would_exceed(self, scan_time: float, limit: float = MAX_DUTY_CYCLE) -> bool:
        """Whether one more scan right now would push the duty cycle over ``limit``."""
        total = self.elapsed + scan_time
        return (self.calibration_time + scan_time) / total > limit


@dataclass
class QKDSystem:
    """
    Handle on one Alice-Bob pair while it operates.

    Attributes:
        link: Static link parameters.
        fringe: Central-bin interference law of the coder pair.
        drift: Path-length drift process.
        bias: Static phase applied on Bob's modulator.
        ledger: Duty-cycle accounting.
    """

    link: LinkParams
    fringe: FringeModel
    drift: DriftState
    bias: float
    ledger: CalibrationLedger = field(default_factory=CalibrationLedger)

    @classmethod
    def aligned(
        cls,
        link: LinkParams,
        drift_rng: np.random.Generator,
        *,
        sigma: float = DEFAULT_DRIFT_RATE,
        fringe: FringeModel | None = None,
    ) -> QKDSystem:
        """Factory-aligned system: zero drift, bias on the constructive point."""
        model = fringe or link_fringe(link)
        return cls(
            link=link,
            fringe=model,
            drift=DriftState.start(drift_rng, sigma),
            bias=-model.constructive_phase,
        )

    @property
    def clock(self) -> float:
        return self.ledger.elapsed

    @property
    def target_bias(self) -> float:
        """Bias that puts matched equal bits on the constructive point right now."""
        return wrap_phase(self.drift.offset - self.fringe.constructive_phase)

    @property
    def working_point_error(self) -> float:
        return wrap_phase(self.target_bias - self.bias)

    def advance(self, dt: float) -> None:
        self.drift = advance_drift(self.drift, dt)
