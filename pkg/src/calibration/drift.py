"""
Residual phase drift of the coder pair.

Temperature and vibration slowly change the arm imbalance. The drift is modeled
as a Wiener process on the interferometric phase; polarization drift is absent
by construction of the Faraday coders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from ..optics import wrap_phase, wrap_phases
from ..utils.errors import ParameterError

DEFAULT_DRIFT_RATE = 0.02  # rad / sqrt(s)


@dataclass(frozen=True, eq=False)
class DriftState:
    """
    Current drift offset and its random source.

    Attributes:
        offset: Phase offset, wrapped to (-pi, pi].
        sigma: Diffusion rate, rad / sqrt(s).
        rng: Generator owned by this drift process.
    """

    offset: float
    sigma: float
    rng: np.random.Generator

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ParameterError(f"drift rate must be >= 0, got {self.sigma}")
        object.__setattr__(self, "offset", wrap_phase(self.offset))

    @classmethod
    def start(
        cls, rng: np.random.Generator, sigma: float = DEFAULT_DRIFT_RATE, offset: float = 0.0
    ) -> DriftState:
        return cls(offset=offset, sigma=sigma, rng=rng)


def advance_drift(state: DriftState, dt: float) -> DriftState:
    """Add one Gaussian increment of variance ``sigma**2 * dt``."""
    if dt < 0:
        raise ParameterError(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return state
    step = state.rng.normal(0.0, state.sigma * np.sqrt(dt))
    return DriftState(offset=state.offset + step, sigma=state.sigma, rng=state.rng)


def advance_drift_path(
    state: DriftState, dts: npt.ArrayLike
) -> tuple[npt.NDArray[np.float64], DriftState]:
    """
    Advance through consecutive steps at once.

    Returns:
        Offsets after each step (wrapped) and the final state.
    """
    steps = np.asarray(dts, dtype=float)
    if np.any(steps < 0):
        raise ParameterError("drift steps must be >= 0")
    if steps.size == 0:
        return np.zeros(0), state
    increments = state.rng.normal(0.0, 1.0, steps.size) * state.sigma * np.sqrt(steps)
    offsets = wrap_phases(state.offset + np.cumsum(increments))
    return offsets, DriftState(offset=float(offsets[-1]), sigma=state.sigma, rng=state.rng)
