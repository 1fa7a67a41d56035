from pathlib import Path

from imitab.config import load_config
from imitab.harness import fit_rate, parse_experiment_config, run_experiment, write_csv
from imitab.utils.app_resources import read_experiment_preset
from imitab.utils.cli import print_rate_fit
from imitab.utils.logs import setup_logging

# preset -> (axis, bound whose capped grid points are left out of the fit)
RATE_PRESETS = {
    "bc_rate_n": ("N", "bc_expected"),
    "bc_rate_h": ("H", None),
    "mimic_emp_rate_n": ("N", "mimic_emp"),
    "mimic_md_known_transition": ("N", None),
    "active_bc_paired": ("N", "bc_expected"),
}


def main(output_dir: Path = Path("tmp/sweeps")) -> None:
    app_config = load_config()
    setup_logging(app_config.log_level)
    for name, (axis, bound) in RATE_PRESETS.items():
        config = parse_experiment_config(read_experiment_preset(name), app_config)
        rows = run_experiment(config)
        write_csv(rows, output_dir / f"{name}.csv")
        print_rate_fit(fit_rate(rows, axis, bound=bound, resamples=app_config.bootstrap_resamples))


if __name__ == "__main__":
    main()
