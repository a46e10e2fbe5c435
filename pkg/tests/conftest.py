"""Shared fixtures."""

import numpy as np
import pytest
from loguru import logger

from src.channel import DetectorModel, FiberSpec, LinkParams, SourceModel
from src.utils import RngStreams


@pytest.fixture(autouse=True)
def _quiet_logs():
    logger.remove()
    yield


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def streams() -> RngStreams:
    return RngStreams.from_seed(7)


@pytest.fixture
def link() -> LinkParams:
    return LinkParams()


@pytest.fixture
def lossless_link() -> LinkParams:
    return LinkParams(fiber=FiberSpec(length=0.0))


@pytest.fixture
def quiet_link() -> LinkParams:
    """Short, dark-free link: every click is signal."""
    return LinkParams(
        fiber=FiberSpec(length=25.0),
        detector=DetectorModel(dark_prob=0.0),
    )


@pytest.fixture
def bright_link() -> LinkParams:
    """Lossless, dark-free link with a very fast source: scans see 1e8 clicks."""
    return LinkParams(
        source=SourceModel(pulse_rate=1e10),
        fiber=FiberSpec(length=0.0),
        detector=DetectorModel(dark_prob=0.0),
    )
