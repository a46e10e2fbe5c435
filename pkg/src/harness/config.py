"""
Experiment configuration: flat INI text validated into pydantic models.

Sections map onto the simulator layers::

    [source]    mu_signal, mu_unmodulated, pulse_width, pulse_rate
    [fiber]     length, atten_coeff, birefringence_seed
    [detector]  efficiency, dark_prob, gate_width
    [link]      bob_insertion_loss, e_opt, arm_delay
    [policy]    period, scan_points, pulses_per_point, qber_trigger, ...
    [run]       scenario, seed, n_pulses, duration, drift_rate, lengths, ...

Keys may also be written as ``section.key = value`` before the first section
header. An empty file yields every default.
"""

from __future__ import annotations

import configparser
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..calibration import DEFAULT_DRIFT_RATE, CalibrationPolicy
from ..channel import LinkParams
from ..protocol import DEFAULT_QBER_LIMIT, DEFAULT_SAMPLE_FRACTION, MAX_TRANSCRIPT_PULSES
from ..utils.errors import ConfigError, PolicyRejectedError

SECTIONS = ("source", "fiber", "detector", "link", "policy", "run")
_LINK_SUBSECTIONS = ("source", "fiber", "detector")
_ROOT = "__root__"

DEFAULT_LENGTHS = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0]


class Scenario(str, Enum):
    """Lab bench or deployed field link."""

    LAB = "lab"
    FIELD = "field"


class RunSettings(BaseModel):
    """What to run and where to write it."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: Scenario = Scenario.LAB
    seed: int = Field(default=0, ge=0)
    n_pulses: int = Field(default=1_000_000, ge=1, le=MAX_TRANSCRIPT_PULSES)
    duration: float = Field(default=3600.0, gt=0, description="s")
    drift_rate: float = Field(default=DEFAULT_DRIFT_RATE, ge=0, description="rad/sqrt(s)")
    slice_seconds: float = Field(default=1.0, gt=0)
    lengths: list[float] = Field(default_factory=lambda: list(DEFAULT_LENGTHS), min_length=1)
    min_detections: int = Field(default=10_000, ge=1)
    max_pulses: int = Field(default=10**11, ge=1)
    sample_fraction: float = Field(default=DEFAULT_SAMPLE_FRACTION, gt=0, lt=1)
    qber_limit: float = Field(default=DEFAULT_QBER_LIMIT, gt=0, le=0.5)
    seeds: int = Field(default=1, ge=1, description="seed family size for field runs")
    workers: int = Field(default=1, ge=1)
    output: Path | None = Field(default=None, description="defaults to QKDSIM_OUTPUT_DIR")

    @field_validator("lengths", mode="before")
    @classmethod
    def _split_lengths(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item for item in (part.strip() for part in value.split(",")) if item]
        return value

    @field_validator("lengths")
    @classmethod
    def _non_negative_lengths(cls, value: list[float]) -> list[float]:
        if any(length < 0 for length in value):
            raise ValueError("every length must be >= 0")
        return value


class ExperimentConfig(BaseModel):
    """
    Full experiment description.

    ``link`` holds the lab parameters; ``scenario_link`` adds the field
    coding error when the scenario asks for it.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    link: LinkParams = Field(default_factory=LinkParams)
    policy: CalibrationPolicy = Field(default_factory=CalibrationPolicy)
    run: RunSettings = Field(default_factory=RunSettings)

    @model_validator(mode="after")
    def _policy_fits_budget(self) -> ExperimentConfig:
        self.policy.check(self.link.source.pulse_rate)
        return self

    @property
    def scenario_link(self) -> LinkParams:
        return self.link.for_field() if self.run.scenario is Scenario.FIELD else self.link

    def with_run(self, **updates: Any) -> ExperimentConfig:
        """Copy with validated overrides of the ``[run]`` section."""
        try:
            run = RunSettings.model_validate({**self.run.model_dump(), **updates})
        except ValidationError as e:
            raise _config_error(e, prefix=("run",)) from e
        return self.model_copy(update={"run": run})


def _field_name(loc: tuple[int | str, ...]) -> str:
    parts = [str(part) for part in loc]
    # link.source.mu_signal is written as source.mu_signal
    if len(parts) >= 2 and parts[0] == "link" and parts[1] in _LINK_SUBSECTIONS:
        parts = parts[1:]
    return ".".join(parts) if parts else "config"


def _config_error(error: ValidationError, prefix: tuple[str, ...] = ()) -> ConfigError:
    first = error.errors()[0]
    loc = tuple(first["loc"])
    # the duty-cycle budget is checked on the whole config but belongs to [policy]
    if not loc and isinstance(first.get("ctx", {}).get("error"), PolicyRejectedError):
        loc = ("policy",)
    return ConfigError(first["msg"], field=_field_name(prefix + loc))


def _parse_value(raw: str) -> str | None:
    value = raw.strip()
    return None if value.lower() in ("", "none") else value


def _read_sections(text: str) -> dict[str, dict[str, str | None]]:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), empty_lines_in_values=False
    )
    try:
        parser.read_string(f"[{_ROOT}]\n{text}")
    except configparser.ParsingError as e:
        line, _ = e.errors[0]
        raise ConfigError(f"cannot parse {e.errors[0][1]!r}", line=line - 1) from e
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as e:
        raise ConfigError(e.message, line=(e.lineno or 1) - 1) from e
    except configparser.Error as e:
        raise ConfigError(str(e)) from e

    sections: dict[str, dict[str, str | None]] = {name: {} for name in SECTIONS}
    for dotted, raw in parser.items(_ROOT):
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError("keys outside a section must be written as section.key", field=dotted)
        if section not in sections:
            raise ConfigError(f"unknown section {section!r}", field=dotted)
        sections[section][key] = _parse_value(raw)

    for section in parser.sections():
        if section == _ROOT:
            continue
        if section not in sections:
            raise ConfigError(
                f"unknown section, expected one of {', '.join(SECTIONS)}", field=section
            )
        for key, raw in parser.items(section, raw=True):
            sections[section][key] = _parse_value(raw)
    return sections


def parse_config(text: str) -> ExperimentConfig:
    """
    Validate INI text into an ``ExperimentConfig``.

    Raises:
        ConfigError: On a syntax error (with line number), an unknown key or
            section, or a value that breaks a documented range (with field name).
    """
    sections = _read_sections(text)
    # Unset keys fall back to model defaults.
    cleaned = {
        name: {key: value for key, value in values.items() if value is not None}
        for name, values in sections.items()
    }
    if sections["policy"].get("qber_trigger", "") is None:
        cleaned["policy"]["qber_trigger"] = None

    payload: dict[str, Any] = {
        "link": {**cleaned["link"], **{sub: cleaned[sub] for sub in _LINK_SUBSECTIONS}},
        "policy": cleaned["policy"],
        "run": cleaned["run"],
    }
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise _config_error(e) from e


def load_config(path: Path | str | None = None) -> ExperimentConfig:
    """
    Read a configuration file; ``None`` gives the defaults.

    Raises:
        ConfigError: If the file is missing or invalid.
    """
    if path is None:
        return ExperimentConfig()
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")
    return parse_config(config_path.read_text(encoding="utf-8"))


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, list):
        return ", ".join(_format(item) for item in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def dump_config(config: ExperimentConfig) -> str:
    """Normalized INI text with every key spelled out; ``parse_config`` inverts it."""
    link = config.link
    values: dict[str, dict[str, Any]] = {
        "source": link.source.model_dump(),
        "fiber": link.fiber.model_dump(),
        "detector": link.detector.model_dump(),
        "link": link.model_dump(exclude=set(_LINK_SUBSECTIONS)),
        "policy": config.policy.model_dump(),
        "run": config.run.model_dump(),
    }
    blocks = []
    for section in SECTIONS:
        lines = [f"[{section}]"] + [f"{key} = {_format(v)}" for key, v in values[section].items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
