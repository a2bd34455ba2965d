"""
Output files of a run: CSV tables, key=value diagnostics and a manifest.
"""

import hashlib
import logging
import platform
from pathlib import Path

import numpy as np
import pandas as pd
import scipy
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from .. import __version__
from ..errors import OutputError
from ..models.numerics import StudyReport
from ..models.requests import RunConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
TEMPLATES = Path(__file__).resolve().parent.parent / "templates"
_environment = Environment(
    loader=FileSystemLoader(TEMPLATES),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
)


def report_frame(report: StudyReport) -> pd.DataFrame:
    return pd.DataFrame(report.rows, columns=report.columns)


def write_report(report: StudyReport, directory: Path) -> Path:
    path = directory / f"{report.name}.csv"
    report_frame(report).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def write_diagnostics(diagnostics: dict, directory: Path) -> Path:
    path = directory / "diagnostics.txt"
    lines = [f"{key}={_format_value(value)}" for key, value in diagnostics.items()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(config.model_dump_json().encode()).hexdigest()


def write_manifest(config: RunConfig, study: str, files: list[str], directory: Path) -> Path:
    """Manifest with the config hash, seed and library versions; no timestamps."""
    text = _environment.get_template("manifest.txt.j2").render(
        study=study,
        seed=config.seed,
        config_hash=config_hash(config),
        versions={
            "heat-medium": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
        },
        files=sorted(files),
    )
    path = directory / "manifest.txt"
    path.write_text(text)
    return path


def write_outputs(outcome, config: RunConfig, directory: Path) -> list[Path]:
    """
    Write every table of a run outcome plus diagnostics and manifest.

    Raises:
        OutputError: If the directory cannot be created or written
    """
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = [write_report(report, directory) for report in outcome.reports]
        written.append(write_diagnostics(outcome.diagnostics, directory))
        written.append(write_manifest(config, outcome.study.value, [p.name for p in written], directory))
    except OSError as e:
        raise OutputError(f"cannot write outputs to {directory}: {e}") from e
    logger.info(f"Wrote {len(written)} files to {directory}")
    return written
