"""One-time pad over sifted key bits."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from ..utils.errors import KeyExhaustedError
from .sifting import key_bytes


def _xor(data: bytes, key: npt.ArrayLike) -> bytes:
    bits = np.asarray(key, dtype=np.uint8)
    needed = 8 * len(data)
    if bits.size < needed:
        raise KeyExhaustedError(f"need {needed} key bits, only {bits.size} available")
    pad = np.frombuffer(key_bytes(bits[:needed]), dtype=np.uint8)
    return (np.frombuffer(data, dtype=np.uint8) ^ pad).tobytes()


def otp_encrypt(key: npt.ArrayLike, plaintext: bytes) -> bytes:
    """XOR ``plaintext`` with the first ``8 * len(plaintext)`` key bits (MSB-first)."""
    return _xor(plaintext, key)


def otp_decrypt(key: npt.ArrayLike, ciphertext: bytes) -> bytes:
    return _xor(ciphertext, key)


class KeyPad:
    """Key bits that are handed out once and never reused."""

    def __init__(self, bits: npt.ArrayLike) -> None:
        self._bits = np.asarray(bits, dtype=np.uint8)
        self._offset = 0

    @property
    def remaining(self) -> int:
        return self._bits.size - self._offset

    def take(self, n_bits: int) -> npt.NDArray[np.uint8]:
        """
        Consume ``n_bits`` fresh key bits.

        Raises:
            KeyExhaustedError: If fewer than ``n_bits`` remain.
        """
        if n_bits > self.remaining:
            raise KeyExhaustedError(f"need {n_bits} key bits, only {self.remaining} remain")
        chunk = self._bits[self._offset : self._offset + n_bits]
        self._offset += n_bits
        return chunk

    def encrypt(self, plaintext: bytes) -> bytes:
        return otp_encrypt(self.take(8 * len(plaintext)), plaintext)

    def decrypt(self, ciphertext: bytes) -> bytes:
        return otp_decrypt(self.take(8 * len(ciphertext)), ciphertext)
