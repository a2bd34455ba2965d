"""
Tests for config parsing and the command-line interface.
"""

import json
import logging
from pathlib import Path

import pandas as pd
import pytest
from typer.testing import CliRunner

from app.cli import cli, dump_config, parse_config
from app.errors import ConfigError
from app.services.medium import default_separation

runner = CliRunner()

SMALL = json.dumps(
    {
        "N": {"kind": "constant", "value": 0.5},
        "h": {"kind": "constant", "value": 0.0},
        "f": {"kind": "gaussian", "center": [0.5, 0.5, 0.5], "width": 0.3, "amplitude": 1.0},
        "lambdas": [2.0],
        "seeds": 2,
        "a_schedule": [0.04, 0.02],
        "grid": 4,
    }
)


def _invoke(command, config_path, out, *extra):
    return runner.invoke(cli, [command, "--config", str(config_path), "--out", str(out), *extra])


def test_minimal_config_gets_defaults():
    config = parse_config("{}")
    assert config.kappa == 0.5
    assert config.domain.hi == (1.0, 1.0, 1.0)
    assert config.lambdas == [1.0]


def test_invalid_kappa_is_reported():
    with pytest.raises(ConfigError, match=r"kappa must lie in \(0,1\)"):
        parse_config('{"kappa": 1.5}')


def test_all_errors_are_collected():
    with pytest.raises(ConfigError) as info:
        parse_config('{"kappa": 1.5, "a": -1, "colour": "red"}')
    assert len(info.value.errors) == 3
    assert any(error.startswith("colour") for error in info.value.errors)


def test_syntax_error_has_position():
    with pytest.raises(ConfigError, match="line 2, column"):
        parse_config('{\n  "kappa": ,\n}')


def test_regime_violation():
    with pytest.raises(ConfigError, match="cube side"):
        parse_config('{"cube_side": 0.05}')


def test_config_round_trip():
    config = parse_config(SMALL)
    assert parse_config(dump_config(config)) == config


def test_sample_writes_outputs(write_config, tmp_path):
    path = write_config(SMALL)
    out = tmp_path / "out"
    result = _invoke("sample", path, out)
    assert result.exit_code == 0, result.output
    assert {p.name for p in out.iterdir()} == {"cloud.csv", "diagnostics.txt", "manifest.txt"}
    cloud = pd.read_csv(out / "cloud.csv")
    assert list(cloud.columns) == ["x", "y", "z", "h", "c"]
    manifest = (out / "manifest.txt").read_text()
    assert "seed=0" in manifest
    assert "config_sha256=" in manifest


def test_outputs_are_reproducible(write_config, tmp_path):
    path = write_config(SMALL)
    for name in ("first", "second"):
        assert _invoke("solve-manybody", path, tmp_path / name, "--seed", "5").exit_code == 0
    for name in ("cloud.csv", "solution.csv", "manifest.txt"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
    assert "seed=5" in (tmp_path / "first" / "manifest.txt").read_text()


def test_zero_coupling_compare(write_config, tmp_path):
    out = tmp_path / "compare"
    result = _invoke("compare", write_config(SMALL), out, "--threads", "2")
    assert result.exit_code == 0, result.output
    table = pd.read_csv(out / "convergence.csv")
    assert list(table.columns) == ["a", "seed", "discrepancy"]
    assert (table["discrepancy"] <= 1e-10).all()


def test_homogenized_and_steady(write_config, tmp_path):
    path = write_config(json.dumps({"h": {"kind": "constant", "value": 0.2}, "grid": 4}))
    assert _invoke("solve-homogenized", path, tmp_path / "hom").exit_code == 0
    field = pd.read_csv(tmp_path / "hom" / "field.csv")
    assert len(field) == 64
    assert "pde_residual=" in (tmp_path / "hom" / "diagnostics.txt").read_text()
    assert _invoke("steady-average", path, tmp_path / "psi").exit_code == 0
    assert (pd.read_csv(tmp_path / "psi" / "psi.csv")["value"] > 0).all()


def test_config_error_exit_code(write_config, tmp_path):
    out = tmp_path / "bad"
    result = _invoke("sample", write_config('{"kappa": 1.5}'), out)
    assert result.exit_code == 2
    assert not out.exists()


def test_missing_config_exit_code(tmp_path):
    result = _invoke("sample", tmp_path / "missing.json", tmp_path / "out")
    assert result.exit_code == 4


def test_numerical_failure_exit_code(write_config, tmp_path):
    path = write_config(json.dumps({"min_separation": 0.5, "cube_side": 0.6}))
    out = tmp_path / "packed"
    out.mkdir()
    (out / "keep.txt").write_text("existing")
    result = _invoke("sample", path, out)
    assert result.exit_code == 3
    assert [p.name for p in out.iterdir()] == ["keep.txt"]


def test_tauberian_needs_three_lambdas(write_config, tmp_path):
    result = _invoke("tauberian", write_config('{"grid": 4}'), tmp_path / "t")
    assert result.exit_code == 2


CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.mark.parametrize("name", ["{}", *sorted(p.name for p in CONFIGS.glob("*.json"))])
def test_shipped_configs_keep_three_radii_of_separation(name):
    config = parse_config(name if name == "{}" else (CONFIGS / name).read_text())
    for a in {config.a, *config.a_schedule}:
        d = config.min_separation or default_separation(config.domain, config.N, a, config.kappa)
        assert d / a >= 3.0


def test_tight_separation_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="app.models.requests"):
        parse_config('{"N": {"kind": "constant", "value": 1.0}, "a_schedule": [0.04]}')
    assert "particle radii" in caplog.text


def test_density_vanishing_on_a_face_is_accepted():
    config = parse_config('{"N": {"kind": "polynomial", "terms": [[1.0, 1, 0, 0]]}}')
    assert config.N.bounds(config.domain)[0] == 0.0


def test_study_must_match_the_command(write_config, tmp_path):
    out = tmp_path / "mismatch"
    result = _invoke("sample", write_config('{"study": "tauberian"}'), out)
    assert result.exit_code == 2
    assert not out.exists()
    assert _invoke("sample", write_config('{"study": "sample"}'), out).exit_code == 0


def test_unexpected_failure_removes_partial_outputs(write_config, tmp_path, monkeypatch):
    def write_then_fail(outcome, config, directory):
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "cloud.csv").write_text("x,y,z,h,c\n")
        raise RuntimeError("disk vanished")

    monkeypatch.setattr("app.cli.write_outputs", write_then_fail)
    out = tmp_path / "partial"
    result = _invoke("sample", write_config(SMALL), out)
    assert result.exit_code == 1
    assert not out.exists()
