"""
BB84 phase coding on the Michelson-Faraday link.

Alice encodes her bit and basis as a modulator phase. Bob, who owns a single
detector, applies his basis phase plus a random reference bit ``r`` times pi;
a click in the central bin tells him Alice's bit equals ``r``.

Two engines share the same physics:

* ``run_session`` samples every pulse and keeps a full transcript
  (capped at ``MAX_TRANSCRIPT_PULSES``).
* ``count_session`` samples category counts per time slice and materializes
  only the sifted bits; it drives long runs, sweeps and the operating loop.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt
import polars as pl
from loguru import logger

from ..channel import (
    ORIGIN_CODES,
    ClickOrigin,
    ClickOutcome,
    LinkParams,
    coded_click_probabilities,
    gate_click_probability,
    sample_clicks,
)
from ..optics import FringeModel, fringe_model, link_fringe
from ..utils.errors import ParameterError
from ..utils.rng import RngStreams, resolve_streams

MAX_TRANSCRIPT_PULSES = 10_000_000
CHUNK_PULSES = 1_000_000


class Basis(str, Enum):
    Z = "Z"
    X = "X"


@dataclass(frozen=True)
class Symbol:
    bit: int
    basis: Basis

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise ParameterError(f"bit must be 0 or 1, got {self.bit}")


def alice_phase(sym: Symbol) -> float:
    """Z: 0 / pi, X: pi/2 / 3pi/2 for bit 0 / 1."""
    return _basis_offset(sym.basis) + sym.bit * np.pi


def bob_phase(basis: Basis) -> float:
    """Z: 0, X: pi/2."""
    return _basis_offset(basis)


def _basis_offset(basis: Basis) -> float:
    return 0.0 if basis is Basis.Z else np.pi / 2


@dataclass(frozen=True)
class WorkingPoint:
    """
    Interferometric state seen by a session.

    Attributes:
        drift: Path-length phase drift, radians.
        bias: Static phase Bob adds to every setting (the calibration correction).
    """

    drift: float = 0.0
    bias: float = 0.0

    @classmethod
    def aligned(cls, fringe: FringeModel | None = None, drift: float = 0.0) -> WorkingPoint:
        """Bias that puts matched, equal bits exactly on the constructive point."""
        model = fringe or fringe_model()
        return cls(drift=drift, bias=drift - model.constructive_phase)


@dataclass(frozen=True)
class BasisAnnouncement:
    """Public message: pulse indices that clicked and the basis used for each."""

    indices: npt.NDArray[np.int64]
    bases: npt.NDArray[np.int8]


@dataclass(frozen=True)
class PulseRecord:
    index: int
    alice: Symbol
    alice_phase: float
    bob_basis: Basis
    bob_reference: int
    bob_phase: float
    outcome: ClickOutcome
    decoded_bit: int | None

    def __post_init__(self) -> None:
        if (self.decoded_bit is not None) != self.outcome.clicked:
            raise ParameterError("decoded_bit must be present exactly when the gate clicked")


TRANSCRIPT_SCHEMA: dict[str, pl.DataType | type[pl.DataType]] = {
    "index": pl.Int64,
    "alice_bit": pl.Int8,
    "alice_basis": pl.Utf8,
    "alice_phase": pl.Float64,
    "bob_basis": pl.Utf8,
    "bob_reference": pl.Int8,
    "bob_phase": pl.Float64,
    "clicked": pl.Boolean,
    "origin": pl.Utf8,
    "decoded_bit": pl.Int8,
}

CSV_COLUMNS = [
    "index",
    "alice_bit",
    "alice_basis",
    "bob_basis",
    "bob_reference",
    "clicked",
    "origin",
    "decoded_bit",
]


@dataclass(frozen=True)
class SessionTranscript:
    """Per-pulse log of one QKD session, stored column-wise."""

    frame: pl.DataFrame
    link: LinkParams
    seed: int

    def __post_init__(self) -> None:
        indices = self.frame["index"].to_numpy()
        if indices.size > 1 and not np.all(np.diff(indices) > 0):
            raise ParameterError("transcript indices must be strictly increasing")

    def __len__(self) -> int:
        return self.frame.height

    @classmethod
    def from_records(
        cls, records: Iterable[PulseRecord], link: LinkParams, seed: int = 0
    ) -> SessionTranscript:
        rows = [
            {
                "index": r.index,
                "alice_bit": r.alice.bit,
                "alice_basis": r.alice.basis.value,
                "alice_phase": r.alice_phase,
                "bob_basis": r.bob_basis.value,
                "bob_reference": r.bob_reference,
                "bob_phase": r.bob_phase,
                "clicked": r.outcome.clicked,
                "origin": r.outcome.origin.value,
                "decoded_bit": r.decoded_bit,
            }
            for r in records
        ]
        return cls(pl.DataFrame(rows, schema=TRANSCRIPT_SCHEMA), link, seed)

    def records(self) -> Iterator[PulseRecord]:
        for row in self.frame.iter_rows(named=True):
            origin = ClickOrigin(row["origin"])
            yield PulseRecord(
                index=row["index"],
                alice=Symbol(row["alice_bit"], Basis(row["alice_basis"])),
                alice_phase=row["alice_phase"],
                bob_basis=Basis(row["bob_basis"]),
                bob_reference=row["bob_reference"],
                bob_phase=row["bob_phase"],
                outcome=ClickOutcome(origin is not ClickOrigin.NONE, origin),
                decoded_bit=row["decoded_bit"],
            )

    def basis_announcement(self) -> BasisAnnouncement:
        """What Bob publishes after the quantum phase."""
        clicked = self.frame.filter(pl.col("clicked"))
        return BasisAnnouncement(
            indices=clicked["index"].to_numpy(),
            bases=(clicked["bob_basis"] == Basis.X.value).cast(pl.Int8).to_numpy(),
        )

    def to_csv_frame(self) -> pl.DataFrame:
        return self.frame.select(CSV_COLUMNS)


def _origin_labels(codes: npt.NDArray[np.int8]) -> npt.NDArray[np.str_]:
    labels = np.empty(codes.shape, dtype=object)
    for origin, code in ORIGIN_CODES.items():
        labels[codes == code] = origin.value
    return labels.astype(str)


def run_session(
    link: LinkParams,
    n_pulses: int,
    rng: np.random.Generator | RngStreams,
    *,
    working_point: WorkingPoint | None = None,
    fringe: FringeModel | None = None,
) -> SessionTranscript:
    """
    Simulate ``n_pulses`` coded pulses pulse by pulse.

    Alice and Bob draw from their own streams; the detector draws from the
    channel stream, so a session is reproducible from its seed.

    Raises:
        ParameterError: If ``n_pulses`` is not in ``[1, MAX_TRANSCRIPT_PULSES]``.
    """
    if not 0 < n_pulses <= MAX_TRANSCRIPT_PULSES:
        raise ParameterError(
            f"n_pulses must lie in [1, {MAX_TRANSCRIPT_PULSES}], got {n_pulses}"
        )
    streams = resolve_streams(rng)
    model = fringe or link_fringe(link)
    point = working_point or WorkingPoint.aligned(model)
    dark = link.detector.dark_prob

    chunks: list[pl.DataFrame] = []
    for start in range(0, n_pulses, CHUNK_PULSES):
        n = min(CHUNK_PULSES, n_pulses - start)
        alice_bits = streams.alice.integers(0, 2, n, dtype=np.int8)
        alice_bases = streams.alice.integers(0, 2, n, dtype=np.int8)
        bob_bases = streams.bob.integers(0, 2, n, dtype=np.int8)
        bob_refs = streams.bob.integers(0, 2, n, dtype=np.int8)

        phase_a = alice_bases * (np.pi / 2) + alice_bits * np.pi
        phase_b = bob_bases * (np.pi / 2)
        delta = phase_a - (phase_b + bob_refs * np.pi + point.bias) + point.drift
        p_signal = coded_click_probabilities(link, model(delta), model(delta + np.pi))
        codes = sample_clicks(streams.channel, p_signal, dark)
        clicked = codes != 0

        chunks.append(
            pl.DataFrame(
                {
                    "index": np.arange(start, start + n, dtype=np.int64),
                    "alice_bit": alice_bits,
                    "alice_basis": np.where(alice_bases == 0, Basis.Z.value, Basis.X.value),
                    "alice_phase": phase_a,
                    "bob_basis": np.where(bob_bases == 0, Basis.Z.value, Basis.X.value),
                    "bob_reference": bob_refs,
                    "bob_phase": phase_b,
                    "clicked": clicked,
                    "origin": _origin_labels(codes),
                }
            ).with_columns(
                pl.when(pl.col("clicked"))
                .then(pl.col("bob_reference"))
                .otherwise(None)
                .cast(pl.Int8)
                .alias("decoded_bit")
            )
        )

    frame = pl.concat(chunks)
    logger.debug(f"Session: {n_pulses:,} pulses, {int(frame['clicked'].sum()):,} clicks")
    return SessionTranscript(frame=frame, link=link, seed=streams.seed)


@dataclass(frozen=True)
class CountSummary:
    """
    Aggregated outcome of a counting session.

    Per-slice arrays share one index; totals are sums over slices.
    """

    pulses: npt.NDArray[np.int64]
    clicks: npt.NDArray[np.int64]
    signal_clicks: npt.NDArray[np.int64]
    dark_clicks: npt.NDArray[np.int64]
    sifted: npt.NDArray[np.int64]
    errors: npt.NDArray[np.int64]
    alice_bits: npt.NDArray[np.int8] = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    bob_bits: npt.NDArray[np.int8] = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    @property
    def total_pulses(self) -> int:
        return int(self.pulses.sum())

    @property
    def total_clicks(self) -> int:
        return int(self.clicks.sum())

    @property
    def total_sifted(self) -> int:
        return int(self.sifted.sum())

    @property
    def total_errors(self) -> int:
        return int(self.errors.sum())

    @property
    def qber(self) -> float:
        return self.total_errors / self.total_sifted if self.total_sifted else float("nan")


# Category order: matched & equal bits, matched & different bits, two mismatched quadratures.
_CATEGORY_ALICE_PHASE = np.array([0.0, np.pi, np.pi / 2, 3 * np.pi / 2])
_CATEGORY_WEIGHTS = np.full(4, 0.25)


def count_session(
    link: LinkParams,
    slice_pulses: npt.ArrayLike,
    rng: np.random.Generator | RngStreams,
    *,
    drift: npt.ArrayLike = 0.0,
    bias: float | None = None,
    fringe: FringeModel | None = None,
    materialize_key: bool = False,
) -> CountSummary:
    """
    Sample a session as category counts, one row per time slice.

    Args:
        link: Link parameters.
        slice_pulses: Pulses fired in each slice.
        rng: Generator or party streams.
        drift: Phase drift per slice (scalar broadcasts).
        bias: Bob's static phase; defaults to the aligned bias for zero drift.
        fringe: Central-bin law; defaults to ideal coders behind the fiber birefringence.
        materialize_key: Also draw the sifted bit strings of both parties.
    """
    streams = resolve_streams(rng)
    model = fringe or link_fringe(link)
    bob_bias = WorkingPoint.aligned(model).bias if bias is None else bias

    pulses = np.atleast_1d(np.asarray(slice_pulses, dtype=np.int64))
    drifts = np.broadcast_to(np.asarray(drift, dtype=float), pulses.shape)
    if np.any(pulses < 0):
        raise ParameterError("slice pulse counts must be >= 0")

    delta = _CATEGORY_ALICE_PHASE[None, :] - bob_bias + drifts[:, None]
    p_signal = coded_click_probabilities(link, model(delta), model(delta + np.pi))

    per_category = streams.bob.multinomial(pulses, _CATEGORY_WEIGHTS)
    signal = streams.channel.binomial(per_category, p_signal)
    dark = streams.channel.binomial(per_category - signal, link.detector.dark_prob)
    clicks = signal + dark

    sifted = clicks[:, 0] + clicks[:, 1]
    errors = clicks[:, 1]
    summary = CountSummary(
        pulses=pulses,
        clicks=clicks.sum(axis=1),
        signal_clicks=signal.sum(axis=1),
        dark_clicks=dark.sum(axis=1),
        sifted=sifted,
        errors=errors,
    )
    if not materialize_key:
        return summary

    n_sifted, n_errors = summary.total_sifted, summary.total_errors
    alice_bits = streams.alice.integers(0, 2, n_sifted, dtype=np.int8)
    flips = np.zeros(n_sifted, dtype=np.int8)
    flips[streams.channel.choice(n_sifted, size=n_errors, replace=False)] = 1
    return CountSummary(
        pulses=summary.pulses,
        clicks=summary.clicks,
        signal_clicks=summary.signal_clicks,
        dark_clicks=summary.dark_clicks,
        sifted=summary.sifted,
        errors=summary.errors,
        alice_bits=alice_bits,
        bob_bits=alice_bits ^ flips,
    )


def expected_click_rate(
    link: LinkParams,
    *,
    drift: float = 0.0,
    bias: float | None = None,
    fringe: FringeModel | None = None,
) -> float:
    """Analytic per-pulse click probability for the same category mixture."""
    model = fringe or link_fringe(link)
    bob_bias = WorkingPoint.aligned(model).bias if bias is None else bias
    delta = _CATEGORY_ALICE_PHASE - bob_bias + drift
    p_signal = coded_click_probabilities(link, model(delta), model(delta + np.pi))
    return float(np.mean(gate_click_probability(p_signal, link.detector.dark_prob)))
