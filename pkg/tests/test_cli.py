import json

import pytest

from imitab.exceptions import ConfigError
from imitab.utils.cli import COMMANDS, parse_cli_args


def run_cli(argv: list[str], app_config) -> int:
    args = parse_cli_args(argv)
    return COMMANDS[args.command](args, app_config)


def test_bounds_json(capsys, app_config):
    assert run_cli(["bounds", "-S", "4", "-H", "5", "-N", "10", "--delta", "0.1", "--json"], app_config) == 0
    records = {r["name"]: r for r in json.loads(capsys.readouterr().out)}
    assert len(records) == 7
    assert records["bc_expected"]["value"] == pytest.approx(40 / 9)
    assert records["bc_expected"]["inputs"] == {"S": 4, "H": 5, "N": 10}
    assert records["bc_highprob"]["inputs"]["delta"] == 0.1


def test_bounds_without_delta(capsys, app_config):
    run_cli(["bounds", "-S", "1", "-H", "1", "-N", "1", "--json"], app_config)
    names = [r["name"] for r in json.loads(capsys.readouterr().out)]
    # Mimic-Emp needs N > 1
    assert "mimic_emp" not in names
    assert len(names) == 4


def test_verify_bounds_suite(capsys, app_config):
    assert run_cli(["verify", "bounds", "--json"], app_config) == 0
    (report,) = json.loads(capsys.readouterr().out)
    assert report["suite"] == "bounds"
    assert report["passed"]


def test_gen_instance(tmp_path, app_config):
    output = tmp_path / "inst.json"
    argv = ["gen-instance", "--family", "known_transition", "-S", "3", "-A", "2", "-H", "4", "-N", "5"]
    argv += ["-o", str(output)]
    assert run_cli(argv, app_config) == 0
    assert output.exists()
    assert (tmp_path / "inst.manifest.json").exists()


def test_run_and_fit(tmp_path, capsys, app_config):
    csv_path = tmp_path / "bc.csv"
    argv = [
        "run",
        "--preset",
        "smoke",
        "--algorithm",
        "bc",
        "--family",
        "no_interaction",
        "--axis",
        "N",
        "--grid",
        "10,20,40,80",
        "--replicates",
        "30",
        "-o",
        str(csv_path),
    ]
    assert run_cli(argv, app_config) == 0
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith("family,algo,S,A,H,N,replicate,seed")
    capsys.readouterr()

    assert run_cli(["fit", str(csv_path), "--x-axis", "N", "--json", "--resamples", "50"], app_config) == 0
    fit = json.loads(capsys.readouterr().out)
    assert fit["x_axis"] == "N"
    assert fit["ci_low"] <= fit["slope"] <= fit["ci_high"]
    assert [p["x"] for p in fit["points"]] == [10, 20, 40, 80]


def test_run_rejects_bad_grid(app_config):
    with pytest.raises(ConfigError):
        run_cli(["run", "--preset", "smoke", "--grid", "3,x"], app_config)
