"""
Sifting and error estimation.

The classical channel is authenticated and lossless; Alice and Bob only
exchange the explicit message records defined here and in ``bb84``. The output
is a sifted key: no reconciliation or privacy amplification is applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import polars as pl
from loguru import logger

from ..utils.errors import NoDataError, ParameterError
from .bb84 import CountSummary, SessionTranscript

DEFAULT_QBER_LIMIT = 0.10
DEFAULT_SAMPLE_FRACTION = 0.1

BitArray = npt.NDArray[np.int8]


def _empty_bits() -> BitArray:
    return np.zeros(0, dtype=np.int8)


@dataclass(frozen=True)
class SampleDisclosure:
    """Public message: positions of the disclosed key bits and Bob's values there."""

    positions: npt.NDArray[np.int64]
    bob_bits: BitArray


@dataclass(frozen=True)
class SiftedKey:
    """
    Matched-basis key bits.

    Attributes:
        bits: Bob's bits.
        alice_bits: Alice's bits at the same positions (used only for estimation
            and for checking the outcome of the simulation).
        indices: Pulse index each bit came from.
        qber: Error rate measured on the disclosed sample; None before estimation.
        sample_size: Number of disclosed bits.
        aborted: True if the measured QBER exceeded the limit.
    """

    bits: BitArray
    alice_bits: BitArray
    indices: npt.NDArray[np.int64]
    qber: float | None = None
    sample_size: int = 0
    aborted: bool = False
    disclosed: npt.NDArray[np.int64] = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        if not (len(self.bits) == len(self.alice_bits) == len(self.indices)):
            raise ParameterError("bits, alice_bits and indices must have equal length")
        if self.aborted and len(self.bits):
            raise ParameterError("an aborted key must be empty")
        if np.intersect1d(self.disclosed, self.indices).size:
            raise ParameterError("disclosed sample must be disjoint from retained key bits")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def true_qber(self) -> float:
        """Error rate over all retained bits (known only to the simulator)."""
        if not len(self.bits):
            return float("nan")
        return float(np.mean(self.bits != self.alice_bits))

    @classmethod
    def from_counts(cls, summary: CountSummary) -> SiftedKey:
        """Wrap the bits materialized by a counting session."""
        n = len(summary.bob_bits)
        return cls(
            bits=summary.bob_bits,
            alice_bits=summary.alice_bits,
            indices=np.arange(n, dtype=np.int64),
        )


def sift(transcript: SessionTranscript) -> SiftedKey:
    """Keep pulses that clicked with matching bases; key bit is Bob's decoded bit."""
    kept = transcript.frame.filter(
        pl.col("clicked") & (pl.col("alice_basis") == pl.col("bob_basis"))
    )
    return SiftedKey(
        bits=kept["decoded_bit"].to_numpy().astype(np.int8),
        alice_bits=kept["alice_bit"].to_numpy().astype(np.int8),
        indices=kept["index"].to_numpy().astype(np.int64),
    )


def estimate_and_gate(
    key: SiftedKey,
    sample_fraction: float = DEFAULT_SAMPLE_FRACTION,
    rng: np.random.Generator | None = None,
    limit: float = DEFAULT_QBER_LIMIT,
) -> SiftedKey:
    """
    Disclose a random sample, measure its QBER and abort above ``limit``.

    Args:
        key: Sifted key before estimation.
        sample_fraction: Fraction of bits disclosed, in (0, 1).
        rng: Generator choosing the sample.
        limit: Abort threshold.

    Returns:
        The key with disclosed bits removed, or an empty aborted key.

    Raises:
        NoDataError: If the key is empty.
        ParameterError: If ``sample_fraction`` is outside (0, 1).
    """
    if not len(key):
        raise NoDataError("cannot estimate QBER on an empty key")
    if not 0.0 < sample_fraction < 1.0:
        raise ParameterError(f"sample_fraction must lie in (0, 1), got {sample_fraction}")
    generator = rng if rng is not None else np.random.default_rng()

    n = len(key)
    sample_size = min(n, max(1, round(sample_fraction * n)))
    positions = np.sort(generator.choice(n, size=sample_size, replace=False))
    disclosure = SampleDisclosure(positions=positions, bob_bits=key.bits[positions])

    qber = float(np.mean(disclosure.bob_bits != key.alice_bits[disclosure.positions]))
    retained = np.ones(n, dtype=bool)
    retained[positions] = False
    disclosed = key.indices[positions]

    if qber > limit:
        logger.warning(f"Sample QBER {qber:.4f} exceeds limit {limit:.2f}; aborting key")
        return SiftedKey(
            bits=_empty_bits(),
            alice_bits=_empty_bits(),
            indices=np.zeros(0, dtype=np.int64),
            qber=qber,
            sample_size=sample_size,
            aborted=True,
            disclosed=disclosed,
        )

    return SiftedKey(
        bits=key.bits[retained],
        alice_bits=key.alice_bits[retained],
        indices=key.indices[retained],
        qber=qber,
        sample_size=sample_size,
        disclosed=disclosed,
    )


def key_bytes(bits: npt.ArrayLike) -> bytes:
    """Pack bits MSB-first; trailing bits short of a full byte are dropped."""
    array = np.asarray(bits, dtype=np.uint8)
    whole = (array.size // 8) * 8
    return np.packbits(array[:whole]).tobytes()


def raw_key_hex(key: SiftedKey) -> str:
    """Bob's key as lowercase hex."""
    return key_bytes(key.bits).hex()
