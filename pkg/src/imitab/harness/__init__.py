__all__ = [
    "SUITES",
    "fit_rate",
    "fit_to_dict",
    "format_csv",
    "load_experiment_config",
    "parse_experiment_config",
    "read_csv",
    "run_experiment",
    "run_replicate",
    "verify",
    "write_csv",
]


from imitab.harness.fitting import fit_rate, fit_to_dict
from imitab.harness.runner import (
    format_csv,
    load_experiment_config,
    parse_experiment_config,
    read_csv,
    run_experiment,
    run_replicate,
    write_csv,
)
from imitab.harness.verify import SUITES, verify
