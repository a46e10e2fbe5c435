"""CSV and key-file writers for experiment outputs."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import polars as pl
from loguru import logger

from ..calibration import OperationLog
from ..protocol import SessionTranscript, SiftedKey, raw_key_hex
from .config import ExperimentConfig, dump_config
from .experiments import SWEEP_COLUMNS, RunReport, StabilityResult, reports_frame


def _write(frame: pl.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.write_csv(path)
    logger.info(f"Wrote {frame.height:,} rows to {path}")
    return path


def write_transcript(transcript: SessionTranscript, path: Path) -> Path:
    return _write(transcript.to_csv_frame(), path)


def write_sweep(table: pl.DataFrame, path: Path) -> Path:
    return _write(table.select(SWEEP_COLUMNS), path)


def write_operation_log(log: OperationLog, path: Path) -> Path:
    return _write(log.to_csv_frame(), path)


def write_stability(result: StabilityResult, path: Path) -> tuple[Path, Path]:
    """Write the calibrated log (with drift) and ``<stem>_uncorrected.csv`` beside it."""
    uncorrected = path.with_name(f"{path.stem}_uncorrected{path.suffix or '.csv'}")
    return _write(result.frame, path), _write(result.uncorrected, uncorrected)


def write_reports(reports: Sequence[RunReport], path: Path) -> Path:
    """Report table without wall-clock runtime; the file depends only on (config, seed)."""
    return _write(reports_frame(reports).drop("runtime_s"), path)


def write_key_hex(key: SiftedKey, path: Path) -> Path:
    """One line of lowercase hex, MSB-first, whole bytes only."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(raw_key_hex(key) + "\n", encoding="ascii")
    logger.info(f"Wrote {len(key) // 8:,} key bytes to {path}")
    return path


def write_config(config: ExperimentConfig, path: Path) -> Path:
    """Normalized configuration next to the results it produced."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(config), encoding="utf-8")
    return path
