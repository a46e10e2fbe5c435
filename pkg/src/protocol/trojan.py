"""
Trojan-horse monitor on Alice's side.

Light travelling back out of the fiber into Alice's zone is counted in windows
of pulses. Legitimate operation only produces detector noise and a little
back-reflection, so a count far above its Poisson expectation raises an alarm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from ..utils.errors import ParameterError

SIGMA_MULTIPLE = 5.0


def default_threshold(expected: float) -> float:
    """Poisson tail bound ``mean + 5 * sqrt(mean)``."""
    if expected <= 0:
        raise ParameterError(f"expected reverse count must be > 0, got {expected}")
    return expected + SIGMA_MULTIPLE * float(np.sqrt(expected))


@dataclass(frozen=True)
class TrojanMonitor:
    """
    One monitoring window.

    Attributes:
        window: Pulses in the window.
        threshold: Alarm level on the reverse-photon count.
        observed: Reverse-photon count actually registered.
    """

    window: int
    threshold: float
    observed: int = 0

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise ParameterError(f"window must be > 0, got {self.window}")
        if self.threshold <= 0:
            raise ParameterError(f"threshold must be > 0, got {self.threshold}")

    @classmethod
    def for_window(cls, window: int, legit_per_pulse: float, observed: int = 0) -> TrojanMonitor:
        """Monitor whose threshold sits five sigma above the legitimate flux."""
        threshold = default_threshold(window * legit_per_pulse)
        return cls(window=window, threshold=threshold, observed=observed)


def trojan_check(monitor: TrojanMonitor) -> bool:
    """Alarm iff the observed count exceeds the threshold."""
    return monitor.observed > monitor.threshold


def alarm_probability(threshold: float, expected: float) -> float:
    """Probability that a Poisson(expected) window count exceeds ``threshold``."""
    return float(poisson.sf(np.floor(threshold), expected))


def sample_monitor_window(
    rng: np.random.Generator,
    window: int,
    legit_per_pulse: float,
    *,
    injected_photons: float = 0.0,
) -> TrojanMonitor:
    """
    Simulate one window, optionally with injected bright light.

    Args:
        rng: Monitor stream.
        window: Pulses in the window.
        legit_per_pulse: Expected legitimate reverse counts per pulse.
        injected_photons: Expected reverse photons an eavesdropper's injected light adds.
    """
    observed = int(rng.poisson(window * legit_per_pulse + injected_photons))
    return TrojanMonitor.for_window(window, legit_per_pulse, observed=observed)
