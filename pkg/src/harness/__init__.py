"""Experiment configuration, seeded runners and CSV export."""

from .config import (
    SECTIONS,
    ExperimentConfig,
    RunSettings,
    Scenario,
    dump_config,
    load_config,
    parse_config,
)
from .experiments import (
    SWEEP_COLUMNS,
    ExperimentRunner,
    RunReport,
    SessionResult,
    StabilityResult,
    field_scenario,
    point_seed,
    reports_frame,
    sample_payload,
    simulate,
    stability_trace,
    sweep_distance,
)
from .export import (
    write_config,
    write_key_hex,
    write_operation_log,
    write_reports,
    write_stability,
    write_sweep,
    write_transcript,
)

__all__ = [
    "SECTIONS",
    "SWEEP_COLUMNS",
    "ExperimentConfig",
    "ExperimentRunner",
    "RunReport",
    "RunSettings",
    "Scenario",
    "SessionResult",
    "StabilityResult",
    "dump_config",
    "field_scenario",
    "load_config",
    "parse_config",
    "point_seed",
    "reports_frame",
    "sample_payload",
    "simulate",
    "stability_trace",
    "sweep_distance",
    "write_config",
    "write_key_hex",
    "write_operation_log",
    "write_reports",
    "write_stability",
    "write_sweep",
    "write_transcript",
]
