"""
Seeded experiments: single sessions, distance sweeps, stability traces and
the field deployment with its one-time-pad demo.

Every experiment takes an ``ExperimentConfig`` and derives all randomness from
``config.run.seed``; the same configuration always yields the same tables.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from typing import TypeVar

import numpy as np
import polars as pl
from loguru import logger

from ..calibration import OperationLog, operate, uncorrected_trace
from ..channel import LinkParams, expected_qber
from ..protocol import (
    CountSummary,
    KeyPad,
    SessionTranscript,
    SiftedKey,
    count_session,
    estimate_and_gate,
    expected_click_rate,
    otp_decrypt,
    otp_encrypt,
    run_session,
    sift,
)
from ..utils.errors import KeyExhaustedError, NoDataError, ParameterError
from ..utils.rng import RngStreams
from .config import ExperimentConfig, Scenario

T = TypeVar("T")
R = TypeVar("R")

SWEEP_COLUMNS = [
    "length_km",
    "pulses",
    "detections",
    "raw_rate",
    "sifted_rate",
    "qber",
    "expected_qber",
    "aborted",
]

# Margin on the analytic pulse estimate so one batch usually suffices.
_BATCH_MARGIN = 1.2


def sample_payload() -> bytes:
    """Bundled plaintext for the one-time-pad demo."""
    return (resources.files("src.harness") / "assets" / "sample_payload.txt").read_bytes()


def point_seed(seed: int, index: int) -> int:
    """Independent child seed for the ``index``-th point of a seeded experiment."""
    return int(np.random.SeedSequence((seed, index)).generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class RunReport:
    """
    Headline numbers of one run.

    ``qber`` is measured on the disclosed sample, so it is NaN when no key was
    sifted. Rates are per fired pulse.
    """

    scenario: str
    seed: int
    length_km: float
    pulses: int
    detections: int
    sifted_bits: int
    key_bits: int
    qber: float
    qber_limit: float
    aborted: bool
    raw_rate: float
    sifted_rate: float
    duty_cycle: float
    runtime_s: float
    otp_roundtrip: bool | None = None
    otp_bit_errors: int | None = None

    def __post_init__(self) -> None:
        for name in ("raw_rate", "sifted_rate", "duty_cycle"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        if self.aborted and not self.qber > self.qber_limit:
            raise ParameterError("an aborted run must have QBER above the limit")

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame([asdict(self)])


def reports_frame(reports: Sequence[RunReport]) -> pl.DataFrame:
    """Stack reports in input order."""
    return pl.concat([report.to_frame() for report in reports], how="vertical_relaxed")


@dataclass(frozen=True)
class ExperimentRunner:
    """
    Runs independent experiment points, optionally in worker processes.

    Results always come back in input order.
    """

    workers: int = 1

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        tasks = list(items)
        if self.workers <= 1 or len(tasks) <= 1:
            return [fn(task) for task in tasks]
        logger.info(f"Running {len(tasks)} tasks on {min(self.workers, len(tasks))} workers")
        with ProcessPoolExecutor(max_workers=min(self.workers, len(tasks))) as pool:
            return list(pool.map(fn, tasks))

    def run_many(self, config: ExperimentConfig, seeds: Iterable[int]) -> list[RunReport]:
        """Field scenario once per seed."""
        return self.map(_field_task, [(config, seed) for seed in seeds])


def _estimate(
    key: SiftedKey, config: ExperimentConfig, rng: np.random.Generator
) -> SiftedKey | None:
    try:
        return estimate_and_gate(
            key, config.run.sample_fraction, rng=rng, limit=config.run.qber_limit
        )
    except NoDataError:
        logger.warning("No sifted bits; nothing to estimate")
        return None


def _report(
    config: ExperimentConfig,
    link: LinkParams,
    *,
    scenario: Scenario,
    pulses: int,
    detections: int,
    sifted_bits: int,
    key: SiftedKey | None,
    duty_cycle: float,
    started: float,
    otp: tuple[bool, int] | None = None,
) -> RunReport:
    return RunReport(
        scenario=scenario.value,
        seed=config.run.seed,
        length_km=link.fiber.length,
        pulses=pulses,
        detections=detections,
        sifted_bits=sifted_bits,
        key_bits=0 if key is None else len(key),
        qber=float("nan") if key is None or key.qber is None else key.qber,
        qber_limit=config.run.qber_limit,
        aborted=False if key is None else key.aborted,
        raw_rate=detections / pulses if pulses else 0.0,
        sifted_rate=sifted_bits / pulses if pulses else 0.0,
        duty_cycle=duty_cycle,
        runtime_s=time.perf_counter() - started,
        otp_roundtrip=None if otp is None else otp[0],
        otp_bit_errors=None if otp is None else otp[1],
    )


@dataclass(frozen=True)
class SessionResult:
    """Report plus the artifacts of a single pulse-by-pulse session."""

    report: RunReport
    transcript: SessionTranscript
    key: SiftedKey | None


def simulate(config: ExperimentConfig) -> SessionResult:
    """
    One static session of ``run.n_pulses`` pulses with a full transcript.

    No drift acts on the link; the working point is the factory alignment.
    """
    started = time.perf_counter()
    link = config.scenario_link
    streams = RngStreams.from_seed(config.run.seed)
    logger.info(
        f"Simulating {config.run.n_pulses:,} pulses over {link.fiber.length} km "
        f"({config.run.scenario.value})"
    )
    transcript = run_session(link, config.run.n_pulses, streams)
    sifted = sift(transcript)
    key = _estimate(sifted, config, streams.estimation)
    report = _report(
        config,
        link,
        scenario=config.run.scenario,
        pulses=len(transcript),
        detections=int(transcript.frame["clicked"].sum()),
        sifted_bits=len(sifted),
        key=key,
        duty_cycle=0.0,
        started=started,
    )
    logger.success(f"Session done: QBER {report.qber:.4f}, {report.key_bits:,} key bits")
    return SessionResult(report=report, transcript=transcript, key=key)


def _sweep_point(task: tuple[ExperimentConfig, float, int]) -> dict[str, object]:
    config, length, index = task
    link = config.link.with_length(length)
    streams = RngStreams.from_seed(point_seed(config.run.seed, index))
    target, cap = config.run.min_detections, config.run.max_pulses
    rate = expected_click_rate(link)

    pulses = detections = sifted = errors = 0
    while pulses < cap and detections < target:
        needed = _BATCH_MARGIN * (target - detections) / rate if rate > 0 else cap
        batch = int(min(max(np.ceil(needed), 1_000), cap - pulses))
        summary: CountSummary = count_session(link, [batch], streams)
        pulses += summary.total_pulses
        detections += summary.total_clicks
        sifted += summary.total_sifted
        errors += summary.total_errors

    qber = errors / sifted if sifted else float("nan")
    logger.debug(f"{length:g} km: {pulses:,} pulses, {detections:,} detections, QBER {qber:.4f}")
    return {
        "length_km": float(length),
        "pulses": pulses,
        "detections": detections,
        "raw_rate": detections / pulses,
        "sifted_rate": sifted / pulses,
        "qber": qber,
        "expected_qber": expected_qber(link),
        "aborted": not qber <= config.run.qber_limit,
    }


def sweep_distance(
    config: ExperimentConfig,
    lengths: Sequence[float] | None = None,
    runner: ExperimentRunner | None = None,
) -> pl.DataFrame:
    """
    Lab-scenario rates and QBER against fiber length, without drift.

    Each point runs until ``run.min_detections`` clicks or ``run.max_pulses``
    pulses, whichever comes first.

    Args:
        config: Experiment configuration.
        lengths: Fiber lengths in km; defaults to ``run.lengths``.
        runner: Executes points, possibly in parallel.

    Returns:
        One row per length, in the given order.
    """
    points = list(lengths) if lengths is not None else list(config.run.lengths)
    if not points:
        raise ParameterError("lengths must not be empty")
    executor = runner or ExperimentRunner(config.run.workers)
    logger.info(f"Sweeping {len(points)} lengths from {min(points):g} to {max(points):g} km")
    rows = executor.map(_sweep_point, [(config, length, i) for i, length in enumerate(points)])
    table = pl.DataFrame(
        rows,
        schema={
            "length_km": pl.Float64,
            "pulses": pl.Int64,
            "detections": pl.Int64,
            "raw_rate": pl.Float64,
            "sifted_rate": pl.Float64,
            "qber": pl.Float64,
            "expected_qber": pl.Float64,
            "aborted": pl.Boolean,
        },
    )
    logger.success(f"Sweep done: {table['aborted'].sum()} of {table.height} lengths over limit")
    return table


@dataclass(frozen=True)
class StabilityResult:
    """Operation log of a calibrated run and a free-running drift trace."""

    log: OperationLog
    uncorrected: pl.DataFrame

    @property
    def frame(self) -> pl.DataFrame:
        return self.log.frame


def stability_trace(config: ExperimentConfig, duration: float | None = None) -> StabilityResult:
    """
    Long-term run of the operating cycle, plus the drift left uncorrected.

    Args:
        config: Experiment configuration; ``policy.enabled`` selects whether
            the run calibrates.
        duration: Seconds to simulate; defaults to ``run.duration``.
    """
    seconds = config.run.duration if duration is None else duration
    link = config.scenario_link
    log = operate(
        link,
        config.policy,
        seconds,
        RngStreams.from_seed(config.run.seed),
        sigma=config.run.drift_rate,
        slice_seconds=config.run.slice_seconds,
    )
    free_drift = RngStreams.from_seed(point_seed(config.run.seed, 0)).drift
    uncorrected = uncorrected_trace(
        link, seconds, free_drift, sigma=config.run.drift_rate, step=config.run.slice_seconds
    )
    logger.success(
        f"Stability trace: {log.frame.height} intervals, "
        f"peak free-running QBER {uncorrected['expected_qber'].max():.4f}"
    )
    return StabilityResult(log=log, uncorrected=uncorrected)


def _otp_demo(key: SiftedKey, payload: bytes) -> tuple[bool, int] | None:
    """
    Alice encrypts the payload from her pad; Bob decrypts from his.

    Each party consumes its key bits once through a ``KeyPad``.

    Returns:
        Whether Alice's pad segment inverts itself exactly and how many payload
        bits differ after Bob's decryption (no error correction is run), or None
        when the key is too short.
    """
    alice, bob = KeyPad(key.alice_bits), KeyPad(key.bits)
    try:
        segment = alice.take(8 * len(payload))
        ciphertext = otp_encrypt(segment, payload)
        received = bob.decrypt(ciphertext)
    except KeyExhaustedError as e:
        logger.warning(f"Skipping one-time-pad demo: {e}")
        return None
    roundtrip = otp_decrypt(segment, ciphertext) == payload
    diff = np.frombuffer(received, dtype=np.uint8) ^ np.frombuffer(payload, dtype=np.uint8)
    return roundtrip, int(np.unpackbits(diff).sum())


def field_scenario(config: ExperimentConfig, seed: int | None = None) -> RunReport:
    """
    Deployed link: field coding error, drift and active calibration.

    Runs ``run.duration`` seconds, estimates the QBER on a disclosed sample
    and, unless the key was aborted, feeds it to the one-time-pad demo.
    Aborts are reported, never raised.
    """
    started = time.perf_counter()
    cfg = config if seed is None else config.with_run(seed=seed)
    link = cfg.link.for_field()
    streams = RngStreams.from_seed(cfg.run.seed)
    log = operate(
        link,
        cfg.policy,
        cfg.run.duration,
        streams,
        sigma=cfg.run.drift_rate,
        slice_seconds=cfg.run.slice_seconds,
        materialize_key=True,
    )
    if log.key is None:
        raise NoDataError("operation log carries no key")
    key = _estimate(log.key, cfg, streams.estimation)
    otp = None
    if key is not None and not key.aborted:
        otp = _otp_demo(key, sample_payload())

    report = _report(
        cfg,
        link,
        scenario=Scenario.FIELD,
        pulses=log.pulses,
        detections=log.detections,
        sifted_bits=log.sifted_bits,
        key=key,
        duty_cycle=log.duty_cycle,
        started=started,
        otp=otp,
    )
    if report.aborted:
        logger.warning(f"Seed {cfg.run.seed}: key aborted at QBER {report.qber:.4f}")
    else:
        logger.success(
            f"Seed {cfg.run.seed}: QBER {report.qber:.4f}, {report.key_bits:,} key bits, "
            f"duty cycle {report.duty_cycle:.3f}"
        )
    return report


def _field_task(task: tuple[ExperimentConfig, int]) -> RunReport:
    config, seed = task
    return field_scenario(config, seed)
