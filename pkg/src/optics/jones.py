"""
Jones calculus primitives.

Matrices and vectors are thin immutable wrappers over complex numpy arrays so
that the interferometer code reads like the optics: ``T.transpose() @ F @ T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from ..utils.errors import ParameterError

ComplexArray = npt.NDArray[np.complex128]

UNITARY_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class JonesMatrix:
    """Complex 2x2 amplitude transfer matrix."""

    m: ComplexArray

    def __post_init__(self) -> None:
        array = np.asarray(self.m, dtype=np.complex128)
        if array.shape != (2, 2):
            raise ParameterError(f"Jones matrix must be 2x2, got shape {array.shape}")
        object.__setattr__(self, "m", array)

    @classmethod
    def identity(cls) -> JonesMatrix:
        return cls(np.eye(2, dtype=np.complex128))

    @classmethod
    def from_entries(cls, a: complex, b: complex, c: complex, d: complex) -> JonesMatrix:
        """Build ``[[a, b], [c, d]]``."""
        return cls(np.array([[a, b], [c, d]], dtype=np.complex128))

    @classmethod
    def diagonal(cls, x: complex, y: complex) -> JonesMatrix:
        return cls(np.diag(np.array([x, y], dtype=np.complex128)))

    def __matmul__(self, other: JonesMatrix) -> JonesMatrix:
        return JonesMatrix(self.m @ other.m)

    def apply(self, vector: JonesVector) -> JonesVector:
        """Propagate a polarization state through this element."""
        return JonesVector(self.m @ vector.v)

    def scaled(self, factor: complex) -> JonesMatrix:
        return JonesMatrix(self.m * factor)

    def transpose(self) -> JonesMatrix:
        """Return pass through a reciprocal medium."""
        return JonesMatrix(self.m.T)

    def dagger(self) -> JonesMatrix:
        return JonesMatrix(self.m.conj().T)

    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    def singular_values(self) -> npt.NDArray[np.float64]:
        return np.linalg.svd(self.m, compute_uv=False)

    def is_unitary(self, tol: float = UNITARY_TOLERANCE) -> bool:
        """Check ``M†M = I`` entrywise within ``tol``."""
        return bool(np.max(np.abs(self.m.conj().T @ self.m - np.eye(2))) < tol)

    def distance(self, other: JonesMatrix) -> float:
        """Max-norm of the entrywise difference."""
        return float(np.max(np.abs(self.m - other.m)))


@dataclass(frozen=True, eq=False)
class JonesVector:
    """Two complex polarization amplitudes; squared norm is a probability fraction."""

    v: ComplexArray

    def __post_init__(self) -> None:
        array = np.asarray(self.v, dtype=np.complex128)
        if array.shape != (2,):
            raise ParameterError(f"Jones vector must have 2 components, got shape {array.shape}")
        object.__setattr__(self, "v", array)

    @classmethod
    def horizontal(cls) -> JonesVector:
        return cls(np.array([1.0, 0.0], dtype=np.complex128))

    @classmethod
    def vertical(cls) -> JonesVector:
        return cls(np.array([0.0, 1.0], dtype=np.complex128))

    @classmethod
    def linear(cls, angle: float) -> JonesVector:
        """Linear polarization at ``angle`` radians from horizontal."""
        return cls(np.array([np.cos(angle), np.sin(angle)], dtype=np.complex128))

    @classmethod
    def zero(cls) -> JonesVector:
        return cls(np.zeros(2, dtype=np.complex128))

    def __add__(self, other: JonesVector) -> JonesVector:
        return JonesVector(self.v + other.v)

    def scaled(self, factor: complex) -> JonesVector:
        return JonesVector(self.v * factor)

    @property
    def power(self) -> float:
        """Squared norm."""
        return float(np.vdot(self.v, self.v).real)

    def normalized(self) -> JonesVector:
        norm = np.sqrt(self.power)
        if norm == 0:
            raise ParameterError("cannot normalize a zero Jones vector")
        return JonesVector(self.v / norm)


class MirrorKind(str, Enum):
    """Arm terminations."""

    FARADAY90 = "faraday90"
    PLAIN = "plain"


def faraday_mirror() -> JonesMatrix:
    """90 degree Faraday mirror, ``[[0, 1], [-1, 0]]``."""
    return JonesMatrix.from_entries(0, 1, -1, 0)


def mirror_matrix(kind: MirrorKind) -> JonesMatrix:
    """Reflection matrix of an arm termination, global phase dropped."""
    if kind is MirrorKind.FARADAY90:
        return faraday_mirror()
    return JonesMatrix.identity()


def random_birefringence(rng: np.random.Generator, loss_db: float = 0.0) -> JonesMatrix:
    """
    Draw a Haar-random polarization transformation with a scalar loss.

    The draw is made special-unitary: a common phase is optical path length,
    which the drift process owns, not polarization.

    Args:
        rng: Source of randomness; the result is deterministic given its state.
        loss_db: Power loss applied uniformly to both polarizations.

    Returns:
        ``U * 10**(-loss_db / 20)`` with ``U`` in SU(2).

    Raises:
        ParameterError: If ``loss_db`` is negative.
    """
    if loss_db < 0:
        raise ParameterError(f"loss_db must be >= 0, got {loss_db}")
    u = unitary_group.rvs(2, random_state=rng)
    u = u / np.sqrt(np.linalg.det(u))
    return JonesMatrix(u * 10 ** (-loss_db / 20))


def arm_round_trip(t: JonesMatrix, mirror: MirrorKind, extra_phase: float = 0.0) -> JonesMatrix:
    """
    Out-and-back transfer of an interferometer arm.

    The return pass through a reciprocal medium is the transpose of the forward
    pass, so a Faraday termination gives ``T^T F T = det(T) F`` for any ``T``.
    """
    return (t.transpose() @ mirror_matrix(mirror) @ t).scaled(np.exp(1j * extra_phase))
