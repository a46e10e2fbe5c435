"""
Michelson-Faraday coders and the end-to-end time-bin link.

Each coder is a 2x2 coupler feeding a short and a long arm, both terminated by a
mirror. Light enters the coupler at one port and leaves through both: back out
of the entry port (``MONITOR``) and out of the other input-side port
(``FORWARD``). Alice sends her ``FORWARD`` output into the fiber; Bob's detector
sits behind a circulator on his entry port, so his ``MONITOR`` output is the one
that is counted and his ``FORWARD`` output is lost.

Coupler convention: through amplitude ``sqrt(r)``, cross amplitude ``i*sqrt(1-r)``.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import numpy.typing as npt

from ..channel.link import IDEAL_CENTRAL_CEILING, LinkParams, transmittance
from ..utils.errors import ParameterError, UndefinedVisibilityError
from .jones import JonesMatrix, JonesVector, MirrorKind, arm_round_trip, random_birefringence

MIN_SCAN_POINTS = 8


class Port(str, Enum):
    """Input-side coupler ports of a coder."""

    MONITOR = "monitor"
    FORWARD = "forward"


@dataclass(frozen=True)
class InterferometerSpec:
    """
    One unbalanced Michelson coder.

    Attributes:
        coupler_ratio: Through-coupling power ratio of the coupler, in (0, 1).
        delay_ns: Round-trip delay between arms; sets the time-bin spacing.
        short_arm: One-way Jones transfer of the short arm.
        long_arm: One-way Jones transfer of the long arm (phase modulator side).
        phase: Modulator phase applied on the long arm round trip, radians.
        modulator_loss_db: Single-pass modulator insertion loss.
        short_mirror: Termination of the short arm.
        long_mirror: Termination of the long arm.
    """

    coupler_ratio: float = 0.5
    delay_ns: float = 7.5
    short_arm: JonesMatrix = field(default_factory=JonesMatrix.identity)
    long_arm: JonesMatrix = field(default_factory=JonesMatrix.identity)
    phase: float = 0.0
    modulator_loss_db: float = 3.0
    short_mirror: MirrorKind = MirrorKind.FARADAY90
    long_mirror: MirrorKind = MirrorKind.FARADAY90

    def __post_init__(self) -> None:
        if not 0.0 < self.coupler_ratio < 1.0:
            raise ParameterError(f"coupler_ratio must lie in (0, 1), got {self.coupler_ratio}")
        if self.delay_ns <= 0:
            raise ParameterError(f"delay_ns must be > 0, got {self.delay_ns}")
        if self.modulator_loss_db < 0:
            raise ParameterError(f"modulator_loss_db must be >= 0, got {self.modulator_loss_db}")

    @classmethod
    def ideal(
        cls, phase: float = 0.0, mirror: MirrorKind = MirrorKind.FARADAY90
    ) -> InterferometerSpec:
        """Balanced, lossless coder with identity arms."""
        return cls(phase=phase, modulator_loss_db=0.0, short_mirror=mirror, long_mirror=mirror)

    def with_phase(self, phase: float) -> InterferometerSpec:
        return replace(self, phase=phase)

    def check_bins_separable(self, pulse_width_ns: float) -> None:
        """Raise if pulses would overlap neighbouring time bins."""
        if pulse_width_ns >= self.delay_ns:
            raise ParameterError(
                f"pulse width {pulse_width_ns} ns must be shorter than the arm delay "
                f"{self.delay_ns} ns"
            )


@dataclass(frozen=True)
class TimeBinField:
    """Jones amplitudes indexed by ``(time bin, port)``; absent keys carry no light."""

    amplitudes: Mapping[tuple[int, Port], JonesVector]

    def at(self, time_bin: int, port: Port) -> JonesVector:
        return self.amplitudes.get((time_bin, port), JonesVector.zero())

    def power(self, time_bin: int, port: Port) -> float:
        return self.at(time_bin, port).power

    def total_power(self) -> float:
        return sum(vector.power for vector in self.amplitudes.values())

    def bins(self, port: Port) -> list[int]:
        return sorted(b for b, p in self.amplitudes if p is port)


def _accumulate(
    target: dict[tuple[int, Port], JonesVector], key: tuple[int, Port], vector: JonesVector
) -> None:
    target[key] = target[key] + vector if key in target else vector


def interferometer_transfer(
    spec: InterferometerSpec, input_field: JonesVector, input_bin: int = 0
) -> TimeBinField:
    """
    Split one input pulse into the short-arm and long-arm time bins.

    The short arm returns in ``input_bin``; the long arm returns one bin later
    carrying the modulator phase and the double-pass modulator loss.

    Raises:
        ParameterError: If the input norm exceeds 1.
    """
    if input_field.power > 1.0 + 1e-12:
        raise ParameterError(f"input power must be <= 1, got {input_field.power}")

    through = np.sqrt(spec.coupler_ratio)
    cross = 1j * np.sqrt(1.0 - spec.coupler_ratio)
    modulator_amplitude = 10 ** (-2 * spec.modulator_loss_db / 20)

    short_trip = arm_round_trip(spec.short_arm, spec.short_mirror)
    long_trip = arm_round_trip(spec.long_arm, spec.long_mirror, spec.phase).scaled(
        modulator_amplitude
    )
    short_out = short_trip.apply(input_field)
    long_out = long_trip.apply(input_field)

    return TimeBinField(
        {
            (input_bin, Port.MONITOR): short_out.scaled(through * through),
            (input_bin, Port.FORWARD): short_out.scaled(through * cross),
            (input_bin + 1, Port.MONITOR): long_out.scaled(cross * cross),
            (input_bin + 1, Port.FORWARD): long_out.scaled(cross * through),
        }
    )


@dataclass(frozen=True)
class EndToEndField:
    """
    Light leaving the link.

    Attributes:
        alice_monitor: Alice's back-reflected output (never reaches the fiber).
        bob: Bob's outputs; ``Port.MONITOR`` is the detector, ``Port.FORWARD`` is lost.
    """

    alice_monitor: TimeBinField
    bob: TimeBinField

    def detector_power(self, time_bin: int = 1) -> float:
        return self.bob.power(time_bin, Port.MONITOR)

    def total_power(self) -> float:
        alice = sum(
            self.alice_monitor.power(b, Port.MONITOR) for b in self.alice_monitor.bins(Port.MONITOR)
        )
        return alice + self.bob.total_power()


def end_to_end_field(
    alice: InterferometerSpec,
    channel: JonesMatrix,
    bob: InterferometerSpec,
    input_field: JonesVector | None = None,
) -> EndToEndField:
    """
    Propagate one laser pulse through Alice's coder, the fiber and Bob's coder.

    Bin 1 at Bob's detector holds the sum of the short-long and long-short paths.
    """
    source = input_field if input_field is not None else JonesVector.horizontal()
    alice_field = interferometer_transfer(alice, source, 0)

    alice_monitor = TimeBinField(
        {(b, Port.MONITOR): alice_field.at(b, Port.MONITOR) for b in alice_field.bins(Port.MONITOR)}
    )
    bob_amplitudes: dict[tuple[int, Port], JonesVector] = {}
    for time_bin in alice_field.bins(Port.FORWARD):
        arriving = channel.apply(alice_field.at(time_bin, Port.FORWARD))
        for key, vector in interferometer_transfer(bob, arriving, time_bin).amplitudes.items():
            _accumulate(bob_amplitudes, key, vector)

    return EndToEndField(alice_monitor=alice_monitor, bob=TimeBinField(bob_amplitudes))


def fiber_channel(link: LinkParams, channel_unitary: JonesMatrix | None = None) -> JonesMatrix:
    """Scale a polarization transfer by the fiber's amplitude transmittance."""
    unitary = channel_unitary if channel_unitary is not None else JonesMatrix.identity()
    eta = transmittance(link.fiber.length, link.fiber.atten_coeff)
    return unitary.scaled(np.sqrt(eta))


def central_bin_probability(
    alice_phase: float,
    bob_phase: float,
    link: LinkParams,
    channel_unitary: JonesMatrix | None = None,
    *,
    alice: InterferometerSpec | None = None,
    bob: InterferometerSpec | None = None,
) -> float:
    """
    Probability that a photon lands in Bob's detector during the central bin.

    Coders default to ideal lossless Faraday coders; the fiber contributes its
    transmittance and the given polarization transfer.
    """
    if not (np.isfinite(alice_phase) and np.isfinite(bob_phase)):
        raise ParameterError("phases must be finite")
    alice_spec = (alice or InterferometerSpec.ideal()).with_phase(alice_phase)
    bob_spec = (bob or InterferometerSpec.ideal()).with_phase(bob_phase)
    field_out = end_to_end_field(alice_spec, fiber_channel(link, channel_unitary), bob_spec)
    return field_out.detector_power(1)


def visibility(probabilities: Sequence[float] | npt.NDArray[np.float64]) -> float:
    """
    Fringe contrast ``(max - min) / (max + min)`` of a full-period phase scan.

    Raises:
        ParameterError: Fewer than 8 samples.
        UndefinedVisibilityError: The scan carries no light.
    """
    values = np.asarray(probabilities, dtype=float)
    if values.size < MIN_SCAN_POINTS:
        raise ParameterError(f"need at least {MIN_SCAN_POINTS} scan samples, got {values.size}")
    high, low = float(values.max()), float(values.min())
    if high + low <= 0:
        raise UndefinedVisibilityError("scan is all zero")
    return (high - low) / (high + low)


def scan_phases(points: int) -> npt.NDArray[np.float64]:
    """Equally spaced phases covering [0, 2*pi)."""
    return np.arange(points) * (2 * np.pi / points)


def phase_scan(
    alice: InterferometerSpec,
    channel: JonesMatrix,
    bob: InterferometerSpec,
    points: int = 16,
) -> npt.NDArray[np.float64]:
    """Central-bin detector probability while stepping Bob's modulator phase."""
    return np.array(
        [
            end_to_end_field(alice, channel, bob.with_phase(phi)).detector_power(1)
            for phi in scan_phases(points)
        ]
    )


@dataclass(frozen=True)
class FringeModel:
    """
    Closed-form central-bin law ``c0 + c1 cos(d) + c2 sin(d)``.

    ``d`` is Alice's phase minus Bob's phase plus any path-length drift.
    """

    c0: float
    c1: float
    c2: float

    def __call__(self, delta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        d = np.asarray(delta, dtype=float)
        return np.clip(self.c0 + self.c1 * np.cos(d) + self.c2 * np.sin(d), 0.0, None)

    @property
    def constructive_phase(self) -> float:
        """Phase difference of maximum transmission, in (-pi, pi]."""
        return wrap_phase(float(np.arctan2(self.c2, self.c1)))

    @property
    def visibility(self) -> float:
        return float(np.hypot(self.c1, self.c2) / self.c0) if self.c0 > 0 else 0.0

    def normalized(self, delta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Interference factor relative to the ideal 1/4 ceiling."""
        return self(delta) / IDEAL_CENTRAL_CEILING


def fringe_model(
    alice: InterferometerSpec | None = None,
    bob: InterferometerSpec | None = None,
    channel: JonesMatrix | None = None,
) -> FringeModel:
    """Sample the exact Jones model at three phase differences and solve for the law."""
    alice_spec = alice or InterferometerSpec.ideal()
    bob_spec = (bob or InterferometerSpec.ideal()).with_phase(0.0)
    link_matrix = channel if channel is not None else JonesMatrix.identity()

    def sample(delta: float) -> float:
        spec = alice_spec.with_phase(delta)
        return end_to_end_field(spec, link_matrix, bob_spec).detector_power(1)

    p0, p_quarter, p_half = sample(0.0), sample(np.pi / 2), sample(np.pi)
    c0 = (p0 + p_half) / 2
    return FringeModel(c0=c0, c1=(p0 - p_half) / 2, c2=p_quarter - c0)


def fringe_origin(
    alice: InterferometerSpec | None = None,
    bob: InterferometerSpec | None = None,
) -> float:
    """Alice-minus-Bob phase at which the detector sees constructive interference."""
    return fringe_model(alice, bob).constructive_phase


def link_fringe(
    link: LinkParams,
    alice: InterferometerSpec | None = None,
    bob: InterferometerSpec | None = None,
) -> FringeModel:
    """
    Central-bin law of a link whose fiber carries its own birefringence.

    The polarization transform is drawn from ``link.fiber.birefringence_seed``;
    loss stays out of it, since detection applies the fiber transmittance.
    """
    channel = random_birefringence(np.random.default_rng(link.fiber.birefringence_seed))
    return fringe_model(alice, bob, channel)


def wrap_phases(phase: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Wrap every element to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), 2 * np.pi)


def wrap_phase(phase: float) -> float:
    """Wrap to (-pi, pi]."""
    return float(wrap_phases(phase))
