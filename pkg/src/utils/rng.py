"""Seeded random streams: one independent generator per simulated party."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAM_NAMES = ("alice", "bob", "channel", "drift", "estimation", "monitor")


@dataclass(frozen=True)
class RngStreams:
    """Independent generators spawned from one root seed."""

    seed: int
    alice: np.random.Generator
    bob: np.random.Generator
    channel: np.random.Generator
    drift: np.random.Generator
    estimation: np.random.Generator
    monitor: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> RngStreams:
        """Spawn the named streams from ``SeedSequence(seed)`` in a fixed order."""
        children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
        generators = {
            name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)
        }
        return cls(seed=seed, **generators)


def resolve_streams(rng: np.random.Generator | RngStreams) -> RngStreams:
    """Accept either ready-made streams or a single generator to spawn them from."""
    if isinstance(rng, RngStreams):
        return rng
    return RngStreams.from_seed(int(rng.integers(0, 2**63 - 1)))
