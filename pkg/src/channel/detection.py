"""
Photon-counting statistics of the faint-pulse link.

Detection uses the Poisson-averaged form ``1 - exp(-mean)``, exact for a
coherent source behind linear loss. A gate clicks on signal first; if no signal
photon is detected it may still fire on a dark count.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from ..utils.errors import ParameterError
from .link import IDEAL_CENTRAL_CEILING, LinkParams

FloatArray = npt.NDArray[np.float64]


class ClickOrigin(str, Enum):
    SIGNAL = "signal"
    DARK = "dark"
    NONE = "none"


ORIGIN_CODES: dict[ClickOrigin, int] = {
    ClickOrigin.NONE: 0,
    ClickOrigin.SIGNAL: 1,
    ClickOrigin.DARK: 2,
}


@dataclass(frozen=True)
class ClickOutcome:
    """Result of one detector gate."""

    clicked: bool
    origin: ClickOrigin

    def __post_init__(self) -> None:
        if self.clicked == (self.origin is ClickOrigin.NONE):
            raise ParameterError("origin must be NONE exactly when the gate did not click")


def signal_click_probabilities(
    link: LinkParams, p_norm: npt.ArrayLike, mu: float | None = None
) -> FloatArray:
    """Vectorized signal click probability for normalized interference factors."""
    factor = np.asarray(p_norm, dtype=float)
    return -np.expm1(-link.detection_scale(mu) * factor)


def signal_click_probability(
    link: LinkParams, interference_prob: float, *, mu: float | None = None
) -> float:
    """
    Probability that a pulse produces a signal click.

    Args:
        link: Link parameters.
        interference_prob: Central-bin probability of the lossless optics, in [0, 1];
            0.25 is the ideal constructive value.
        mu: Mean photon number; defaults to the coded-pulse level.

    Returns:
        ``1 - exp(-mu * eta_fiber * eta_bob * eta_det * interference_prob / 0.25)``.
    """
    if not 0.0 <= interference_prob <= 1.0:
        raise ParameterError(f"interference_prob must lie in [0, 1], got {interference_prob}")
    return float(signal_click_probabilities(link, interference_prob / IDEAL_CENTRAL_CEILING, mu))


def coded_click_probabilities(
    link: LinkParams, interference_prob: npt.ArrayLike, flipped_prob: npt.ArrayLike
) -> FloatArray:
    """
    Signal click probability of a coded pulse, including the coding error.

    With probability ``e_opt`` the modulator lands on the opposite bit, so the
    pulse sees the interference of its phase shifted by pi. The error is a
    fraction of signal clicks, applied after the detection law.

    Args:
        link: Link parameters.
        interference_prob: Central-bin probability at the intended phase.
        flipped_prob: Central-bin probability at the intended phase plus pi.
    """
    intended = signal_click_probabilities(
        link, np.asarray(interference_prob, dtype=float) / IDEAL_CENTRAL_CEILING
    )
    flipped = signal_click_probabilities(
        link, np.asarray(flipped_prob, dtype=float) / IDEAL_CENTRAL_CEILING
    )
    return (1.0 - link.e_opt) * intended + link.e_opt * flipped


def gate_click_probability(p_signal: npt.ArrayLike, dark_prob: float) -> FloatArray:
    """Total click probability of a gate: signal, or else a dark count."""
    p = np.asarray(p_signal, dtype=float)
    return p + (1.0 - p) * dark_prob


def sample_click(rng: np.random.Generator, p_signal: float, dark_prob: float) -> ClickOutcome:
    """Draw one gate outcome."""
    if not (0.0 <= p_signal <= 1.0 and 0.0 <= dark_prob <= 1.0):
        raise ParameterError("click probabilities must lie in [0, 1]")
    if rng.random() < p_signal:
        return ClickOutcome(True, ClickOrigin.SIGNAL)
    if rng.random() < dark_prob:
        return ClickOutcome(True, ClickOrigin.DARK)
    return ClickOutcome(False, ClickOrigin.NONE)


def sample_clicks(
    rng: np.random.Generator, p_signal: npt.ArrayLike, dark_prob: float
) -> npt.NDArray[np.int8]:
    """
    Vectorized ``sample_click``.

    Returns:
        Origin codes per gate (see ``ORIGIN_CODES``); nonzero means the gate clicked.
    """
    p = np.asarray(p_signal, dtype=float)
    signal = rng.random(p.shape) < p
    dark = ~signal & (rng.random(p.shape) < dark_prob)
    codes = np.zeros(p.shape, dtype=np.int8)
    codes[signal] = ORIGIN_CODES[ClickOrigin.SIGNAL]
    codes[dark] = ORIGIN_CODES[ClickOrigin.DARK]
    return codes


def matched_click_probabilities(link: LinkParams, phase_error: float = 0.0) -> tuple[float, float]:
    """
    Click probabilities of a basis-matched pulse.

    Args:
        link: Link parameters.
        phase_error: Working-point error, radians.

    Returns:
        ``(right, wrong)``: gate click probability when Alice's bit equals Bob's
        reference bit (near-constructive) and when it differs (near-destructive).
    """
    constructive = (1.0 + np.cos(phase_error)) / 2
    levels = IDEAL_CENTRAL_CEILING * np.array([constructive, 1.0 - constructive])
    right, wrong = gate_click_probability(
        coded_click_probabilities(link, levels, levels[::-1]), link.detector.dark_prob
    )
    return float(right), float(wrong)


def expected_qber(link: LinkParams, *, phase_error: float = 0.0) -> float:
    """
    Analytic sifted-key error rate for basis-matched pulses.

    At the aligned point this is
    ``(e_opt * p_sig + p_dark_eff / 2) / (p_sig + p_dark_eff)`` with ``p_sig`` the mean
    matched-basis signal click probability and ``p_dark_eff = dark_prob * (1 - p_sig)``,
    up to terms of order ``dark_prob * p_sig``. Dark clicks carry a random bit, and
    without them the rate is exactly ``e_opt`` at any loss.
    """
    right, wrong = matched_click_probabilities(link, phase_error)
    total = right + wrong
    if total == 0:
        return 0.5
    return wrong / total


def mean_click_probability(link: LinkParams, phase_error: float = 0.0) -> float:
    """Click probability per pulse averaged over uniform bases, bits and reference bits."""
    right, wrong = matched_click_probabilities(link, phase_error)
    mismatched = float(
        gate_click_probability(signal_click_probabilities(link, 0.5), link.detector.dark_prob)
    )
    return 0.25 * right + 0.25 * wrong + 0.5 * mismatched


def secure_distance(link: LinkParams, limit: float = 0.10, max_length: float = 1000.0) -> float:
    """
    Fiber length at which ``expected_qber`` reaches ``limit``.

    Raises:
        ParameterError: If the limit is already exceeded at zero length or never reached.
    """
    def excess(length: float) -> float:
        return expected_qber(link.with_length(length)) - limit

    if excess(0.0) >= 0:
        raise ParameterError(f"QBER exceeds {limit} even at zero length")
    if excess(max_length) <= 0:
        raise ParameterError(f"QBER stays below {limit} up to {max_length} km")
    return float(brentq(excess, 0.0, max_length, xtol=1e-6))
