#!/usr/bin/env python3
"""
QKD link simulator command line.

Usage:
    qkd-sim simulate   [--config FILE] [--seed N] [--out DIR]
    qkd-sim sweep      [--config FILE] [--seed N] [--out DIR] [--lengths 25,50,...]
    qkd-sim stability  [--config FILE] [--seed N] [--out DIR] [--duration S]
    qkd-sim field      [--config FILE] [--seed N] [--out DIR] [--seeds K]
    qkd-sim otp INPUT --key KEY.hex --output FILE

Exit codes:
    0  success
    1  key aborted (QBER over the limit)
    2  configuration or input error
    3  internal error
"""

import sys
from collections.abc import Callable
from pathlib import Path
from typing import TypeVar

import numpy as np
import typer
from loguru import logger
from rich.console import Console
from rich.table import Table

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.harness import (  # noqa: E402
    ExperimentConfig,
    ExperimentRunner,
    RunReport,
    Scenario,
    field_scenario,
    load_config,
    simulate,
    stability_trace,
    sweep_distance,
    write_config,
    write_key_hex,
    write_reports,
    write_stability,
    write_sweep,
    write_transcript,
)
from src.protocol import KeyPad  # noqa: E402
from src.utils import (  # noqa: E402
    ConfigError,
    KeyExhaustedError,
    QKDSimError,
    configure_logging,
    load_settings,
)

EXIT_OK = 0
EXIT_ABORTED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

T = TypeVar("T")

console = Console()
app = typer.Typer(help="Simulate a uni-directional Michelson-Faraday phase-coding QKD link")
settings = load_settings()

ConfigOption = typer.Option(None, "--config", "-c", help="INI configuration file")
SeedOption = typer.Option(None, "--seed", "-s", help="Root seed (overrides [run] seed)")
OutOption = typer.Option(None, "--out", "-o", help="Output directory")


def _guarded(action: Callable[[], T]) -> T:
    """Run ``action`` and map failures onto exit codes."""
    try:
        return action()
    except ConfigError as e:
        console.print(f"[red]Configuration error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG) from e
    except QKDSimError as e:
        console.print(f"[red]Simulation failed: {e}[/red]")
        logger.error(f"Simulation failed: {e}")
        raise typer.Exit(EXIT_INTERNAL) from e
    except Exception as e:
        console.print(f"[red]Internal error: {e}[/red]")
        logger.exception("Internal error")
        raise typer.Exit(EXIT_INTERNAL) from e


def _prepare(
    config_path: Path | None, seed: int | None, out: Path | None, **overrides: object
) -> tuple[ExperimentConfig, Path]:
    configure_logging(settings.log_level, settings.log_dir)

    def build() -> ExperimentConfig:
        config = load_config(config_path)
        updates = {key: value for key, value in overrides.items() if value is not None}
        if seed is not None:
            updates["seed"] = seed
        return config.with_run(**updates) if updates else config

    config = _guarded(build)
    out_dir = out or config.run.output or settings.output_dir
    console.print(f"[green]✓[/green] Seed: [bold]{config.run.seed}[/bold]")
    console.print(f"[green]✓[/green] Output directory: [bold]{out_dir}[/bold]\n")
    return config, out_dir


def _report_table(reports: list[RunReport]) -> Table:
    table = Table(show_header=True, header_style="bold green")
    table.add_column("Seed", justify="right", style="cyan")
    table.add_column("Length (km)", justify="right")
    table.add_column("Pulses", justify="right")
    table.add_column("Key bits", justify="right")
    table.add_column("QBER", justify="right")
    table.add_column("Duty cycle", justify="right")
    table.add_column("Runtime", justify="right")
    table.add_column("Status")
    for r in reports:
        status = "[red]aborted[/red]" if r.aborted else "[green]ok[/green]"
        table.add_row(
            str(r.seed),
            f"{r.length_km:g}",
            f"{r.pulses:,}",
            f"{r.key_bits:,}",
            f"{r.qber:.4f}",
            f"{r.duty_cycle:.3f}",
            f"{r.runtime_s:.1f} s",
            status,
        )
    return table


@app.command("simulate")
def simulate_command(
    config_path: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    pulses: int | None = typer.Option(None, "--pulses", "-n", help="Pulses to fire"),
    scenario: Scenario | None = typer.Option(None, "--scenario", help="lab or field"),
) -> None:
    """Run one static session and write its transcript, key and report."""
    console.print("\n[bold blue]Single session[/bold blue]\n")
    config, out_dir = _prepare(config_path, seed, out, n_pulses=pulses, scenario=scenario)
    result = _guarded(lambda: simulate(config))

    write_transcript(result.transcript, out_dir / "transcript.csv")
    write_reports([result.report], out_dir / "report.csv")
    write_config(config, out_dir / "config.ini")
    if result.key is not None and not result.key.aborted:
        write_key_hex(result.key, out_dir / "key.hex")

    console.print(_report_table([result.report]))
    if result.report.aborted:
        console.print("[yellow]Key aborted: sample QBER above the limit[/yellow]")
        raise typer.Exit(EXIT_ABORTED)


@app.command("sweep")
def sweep_command(
    config_path: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    lengths: str | None = typer.Option(None, "--lengths", "-l", help="Comma-separated km"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker processes"),
) -> None:
    """Rates and QBER against fiber length (Lab scenario, no drift)."""
    console.print("\n[bold blue]Distance sweep[/bold blue]\n")
    config, out_dir = _prepare(config_path, seed, out, lengths=lengths, workers=workers)
    runner = ExperimentRunner(max(config.run.workers, settings.workers if workers is None else 1))
    table = _guarded(lambda: sweep_distance(config, runner=runner))

    write_sweep(table, out_dir / "sweep.csv")
    write_config(config, out_dir / "config.ini")

    summary = Table(show_header=True, header_style="bold magenta")
    summary.add_column("Length (km)", justify="right", style="cyan")
    summary.add_column("Pulses", justify="right")
    summary.add_column("Raw rate", justify="right")
    summary.add_column("Sifted rate", justify="right")
    summary.add_column("QBER", justify="right")
    summary.add_column("Expected", justify="right")
    for row in table.iter_rows(named=True):
        qber = f"[red]{row['qber']:.4f}[/red]" if row["aborted"] else f"{row['qber']:.4f}"
        summary.add_row(
            f"{row['length_km']:g}",
            f"{row['pulses']:,}",
            f"{row['raw_rate']:.3e}",
            f"{row['sifted_rate']:.3e}",
            qber,
            f"{row['expected_qber']:.4f}",
        )
    console.print(summary)


@app.command("stability")
def stability_command(
    config_path: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    duration: float | None = typer.Option(None, "--duration", "-d", help="Seconds to simulate"),
    calibrate: bool = typer.Option(True, "--calibrate/--no-calibrate", help="Run fringe scans"),
) -> None:
    """Long-term run of the calibrate-then-distribute cycle."""
    console.print("\n[bold blue]Stability trace[/bold blue]\n")
    config, out_dir = _prepare(config_path, seed, out, duration=duration)
    if not calibrate:
        config = config.model_copy(
            update={"policy": config.policy.model_copy(update={"enabled": False})}
        )
    result = _guarded(lambda: stability_trace(config))

    write_stability(result, out_dir / "stability.csv")
    write_config(config, out_dir / "config.ini")

    qkd = result.log.intervals("qkd")
    calibrations = result.log.calibrations
    console.print(f"Intervals: [bold]{qkd.height}[/bold] QKD, {calibrations} calibrations")
    console.print(f"Duty cycle: [bold]{result.log.duty_cycle:.3f}[/bold]")
    console.print(f"Worst interval QBER: [bold]{qkd['qber'].max():.4f}[/bold]")
    console.print(
        f"Worst free-running QBER: [bold]{result.uncorrected['expected_qber'].max():.4f}[/bold]"
    )


@app.command("field")
def field_command(
    config_path: Path | None = ConfigOption,
    seed: int | None = SeedOption,
    out: Path | None = OutOption,
    seeds: int | None = typer.Option(None, "--seeds", "-k", help="Runs with seeds seed..seed+k-1"),
    workers: int | None = typer.Option(None, "--workers", "-w", help="Worker processes"),
) -> None:
    """Field deployment with drift, calibration and the one-time-pad demo."""
    console.print("\n[bold blue]Field scenario[/bold blue]\n")
    config, out_dir = _prepare(config_path, seed, out, seeds=seeds, workers=workers)
    family = range(config.run.seed, config.run.seed + config.run.seeds)
    runner = ExperimentRunner(max(config.run.workers, settings.workers if workers is None else 1))
    if len(family) == 1:
        reports = [_guarded(lambda: field_scenario(config))]
    else:
        reports = _guarded(lambda: runner.run_many(config, family))

    write_reports(reports, out_dir / "field.csv")
    write_config(config, out_dir / "config.ini")
    console.print(_report_table(reports))

    qbers = np.array([r.qber for r in reports])
    console.print(f"\nMean QBER: [bold]{np.nanmean(qbers):.4f}[/bold]")
    roundtrips = [r.otp_roundtrip for r in reports if r.otp_roundtrip is not None]
    if roundtrips:
        console.print(f"One-time pad round trip: [bold]{sum(roundtrips)}/{len(roundtrips)}[/bold]")
    if any(r.aborted for r in reports):
        raise typer.Exit(EXIT_ABORTED)


@app.command("otp")
def otp_command(
    input_path: Path = typer.Argument(..., help="File to encrypt or decrypt"),
    key_path: Path = typer.Option(..., "--key", "-k", help="Key file, one line of hex"),
    output_path: Path = typer.Option(..., "--output", "-o", help="Where to write the result"),
) -> None:
    """XOR a file with a key file; the same command encrypts and decrypts."""
    configure_logging(settings.log_level, settings.log_dir)
    try:
        data = input_path.read_bytes()
        key = np.unpackbits(np.frombuffer(bytes.fromhex(key_path.read_text().strip()), np.uint8))
        result = KeyPad(key).encrypt(data)
    except (OSError, ValueError, KeyExhaustedError) as e:
        console.print(f"[red]Cannot apply pad: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG) from e

    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_bytes(result)
    console.print(f"[green]✓[/green] Wrote {len(result):,} bytes to [bold]{output_path}[/bold]")


def main() -> None:
    """Entry point."""
    app()


if __name__ == "__main__":
    main()
