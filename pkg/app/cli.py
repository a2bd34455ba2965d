"""
Command-line interface: one study per invocation, outputs written as CSV
plus diagnostics and a manifest into the output directory.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Annotated, Optional

import typer
from pydantic import ValidationError

from .config.settings import DEFAULT_THREADS, LOG_LEVEL
from .errors import ConfigError, OutputError, SolverError
from .models.requests import RunConfig, Study
from .services.runner import execute
from .utils.io import write_outputs

logger = logging.getLogger(__name__)

cli = typer.Typer(
    name="manybody-heat",
    help="Heat transfer in media with many small particles: sampling, solvers and verification studies.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = Annotated[Path, typer.Option("--config", help="JSON run configuration")]
OutOption = Annotated[Optional[Path], typer.Option("--out", help="Output directory (overrides output_dir)")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", min=0, help="Base random seed")]
ThreadsOption = Annotated[int, typer.Option("--threads", min=1, help="Worker threads for seed studies")]


def _format_location(loc) -> str:
    return ".".join(str(part) for part in loc) or "config"


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate JSON configuration text.

    Raises:
        ConfigError: With the line/column of a syntax error, or every
            validation error found
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        errors = [f"{_format_location(err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ConfigError("invalid configuration: " + "; ".join(errors), errors) from e


def dump_config(config: RunConfig) -> str:
    return config.model_dump_json(indent=2, exclude_none=True)


def load_config(path: Path) -> RunConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot read config {path}: {e}") from e
    return parse_config(text)


def _remove_new_files(directory: Path, before: set[Path], created: bool) -> None:
    if not directory.exists():
        return
    for path in directory.iterdir():
        if path not in before and path.is_file():
            path.unlink(missing_ok=True)
    if created and not any(directory.iterdir()):
        directory.rmdir()


def _run(study: Study, config_path: Path, out: Path | None, seed: int | None, threads: int) -> None:
    directory = None
    before: set[Path] = set()
    created = False
    try:
        config = load_config(config_path)
        if seed is not None:
            config = config.with_seed(seed)
        directory = out or Path(config.output_dir)
        created = not directory.exists()
        before = set(directory.iterdir()) if directory.exists() else set()
        outcome = execute(study, config, threads)
        write_outputs(outcome, config, directory)
    except (SolverError, ValueError, OSError) as e:
        if isinstance(e, SolverError):
            code = e.exit_code
        elif isinstance(e, OSError):
            code = 4
        else:
            code = 2
        logger.error(f"{study.value} failed: {e}")
        typer.echo(f"error: {e}", err=True)
        if directory is not None:
            _remove_new_files(directory, before, created)
        raise typer.Exit(code=code)
    except Exception as e:
        logger.exception(f"{study.value} failed unexpectedly")
        typer.echo(f"error: {type(e).__name__}: {e}", err=True)
        if directory is not None:
            _remove_new_files(directory, before, created)
        raise typer.Exit(code=1)
    typer.echo(f"{study.value}: outputs in {directory}")


@cli.callback()
def main() -> None:
    """Configure logging once per invocation."""
    logging.basicConfig(level=LOG_LEVEL, stream=sys.stderr)


@cli.command("sample")
def sample(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Sample a particle cloud and write its centers and coefficients."""
    _run(Study.SAMPLE, config, out, seed, threads)


@cli.command("solve-manybody")
def solve_manybody(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Solve the many-body linear system for the sampled cloud."""
    _run(Study.SOLVE_MANYBODY, config, out, seed, threads)


@cli.command("solve-homogenized")
def solve_homogenized(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Solve the homogenized integral equation on the collocation grid."""
    _run(Study.SOLVE_HOMOGENIZED, config, out, seed, threads)


@cli.command("steady-average")
def steady_average(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Long-time average psi = (I + B)^-1 phi."""
    _run(Study.STEADY_AVERAGE, config, out, seed, threads)


@cli.command("compare")
def compare(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Many-body versus homogenized discrepancy over the a-schedule."""
    _run(Study.COMPARE, config, out, seed, threads)


@cli.command("tauberian")
def tauberian(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """lambda U(lambda) against psi as lambda decreases."""
    _run(Study.TAUBERIAN, config, out, seed, threads)


@cli.command("verify-lemmas")
def verify_lemmas(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Spherical-layer checks: far-field ratio, jump term, self-potential."""
    _run(Study.VERIFY_LEMMAS, config, out, seed, threads)


@cli.command("time-average")
def time_average(
    config: ConfigOption, out: OutOption = None, seed: SeedOption = None, threads: ThreadsOption = DEFAULT_THREADS
):
    """Time-stepped long-time average compared with the steady average."""
    _run(Study.TIME_AVERAGE, config, out, seed, threads)


if __name__ == "__main__":
    cli()
