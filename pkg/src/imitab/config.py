from configparser import ConfigParser
from pathlib import Path

from imitab.exceptions import ConfigError
from imitab.models import AppConfig, SolverSpec
from imitab.utils.user_appdirs import (
    DEFAULT_CONFIG,
    retrieve_user_config_file,
    retrieve_user_output_dir,
)


def load_config(user_config: Path | None = None) -> AppConfig:
    user_conf = ConfigParser()
    user_conf.read(user_config if user_config is not None else retrieve_user_config_file())
    default_conf = ConfigParser()
    default_conf.read(DEFAULT_CONFIG)

    def get_value(section: str, key: str) -> str:
        section_conf = user_conf[section] if section in user_conf else default_conf[section]
        return section_conf.get(key, default_conf[section][key])

    try:
        output_dir = get_value("General", "OutputDir")
        return AppConfig(
            workers=int(get_value("General", "Workers")),
            log_level=get_value("General", "LogLevel").upper(),
            output_dir=retrieve_user_output_dir() if output_dir == "auto" else Path(output_dir).expanduser(),
            solver=SolverSpec(
                restarts=int(get_value("Solver", "Restarts")),
                steps=int(get_value("Solver", "Steps")),
                step_constant=float(get_value("Solver", "StepConstant")),
                guard_bits=int(get_value("Solver", "EnumerationGuardBits")),
            ),
            bootstrap_resamples=int(get_value("Fit", "BootstrapResamples")),
            confidence_level=float(get_value("Fit", "ConfidenceLevel")),
            probability_tolerance=float(get_value("Tolerance", "Probability")),
        )
    except ValueError as e:
        raise ConfigError(f"malformed config value: {e}")
