from pathlib import Path

import pytest

from imitab.config import load_config
from imitab.exceptions import ConfigError
from imitab.models import SolverSpec


def write_ini(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_fill_missing_sections(tmp_path):
    config = load_config(write_ini(tmp_path / "config.ini", "[General]\nWorkers = 3\nOutputDir = ~/runs\n"))
    assert config.workers == 3
    assert config.log_level == "INFO"
    assert config.output_dir == Path("~/runs").expanduser()
    assert config.solver == SolverSpec(restarts=8, steps=500, step_constant=0.5, guard_bits=24)
    assert config.bootstrap_resamples == 1000
    assert config.confidence_level == 0.95
    assert config.probability_tolerance == 1e-9


def test_user_values_override_defaults(tmp_path):
    text = "[General]\nOutputDir = /tmp/x\nLogLevel = debug\n[Solver]\nRestarts = 2\nEnumerationGuardBits = 10\n"
    config = load_config(write_ini(tmp_path / "config.ini", text))
    assert config.log_level == "DEBUG"
    assert config.output_dir == Path("/tmp/x")
    assert config.solver.restarts == 2
    assert config.solver.guard_bits == 10
    assert config.solver.steps == 500


def test_missing_user_file_uses_defaults(tmp_path):
    config = load_config(tmp_path / "absent.ini")
    assert config.workers == 0
    assert config.solver.kind == "exact"


def test_malformed_value(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_ini(tmp_path / "config.ini", "[Solver]\nSteps = many\n"))
