import dataclasses
import math

import numpy as np
import pytest

from imitab.analytics import bound_bc_expected, bound_mimic_emp, bound_mimic_md_expected
from imitab.exceptions import ConfigError, DegenerateFit, InvalidParameter
from imitab.harness import (
    fit_rate,
    fit_to_dict,
    format_csv,
    parse_experiment_config,
    read_csv,
    run_experiment,
    run_replicate,
    verify,
    write_csv,
)
from imitab.harness.verify import (
    bounds_suite,
    concentration_suite,
    decomposition_suite,
    dp_oracle_suite,
    finite_difference_error,
    reduction_suite,
    solver_suite,
)
from imitab.models import CSV_COLUMNS, ExperimentResult, SolverSpec
from imitab.utils.app_resources import list_experiment_presets, read_experiment_preset

SMOKE = {
    "family": "known_transition",
    "algorithm": "bc",
    "sweep_axis": "N",
    "grid": [4, 8, 16],
    "S": 3,
    "A": 2,
    "H": 3,
    "N": 4,
    "replicates": 4,
    "base_seed": 7,
}


def experiment(app_config, **overrides):
    return parse_experiment_config(SMOKE, app_config, overrides)


def synthetic_rows(means: dict[int, float], replicates: int = 3, **fields) -> list[ExperimentResult]:
    base = dict(family="no_interaction", algo="bc", num_states=2, num_actions=2, horizon=1, pop01=None, tv=None)
    base |= fields
    return [
        ExperimentResult(**base, num_trajectories=x, replicate=r, seed=r, suboptimality=m)
        for x, m in means.items()
        for r in range(replicates)
    ]


def test_presets_parse(app_config):
    assert "smoke" in list_experiment_presets()
    for name in list_experiment_presets():
        config = parse_experiment_config(read_experiment_preset(name), app_config)
        assert config.replicates >= 1


def test_config_overrides(app_config):
    config = experiment(app_config, algorithm="mimic_md", solver={"restarts": 2}, grid=[2, 3])
    assert config.algorithm == "mimic_md"
    assert config.grid == (2, 3)
    assert config.solver == dataclasses.replace(app_config.solver, restarts=2)
    assert config.point(3) == (3, 2, 3, 3)
    assert experiment(app_config, family=None).family == "known_transition"


@pytest.mark.parametrize(
    "overrides",
    [
        {"family": "grid_world"},
        {"algorithm": "dagger"},
        {"sweep_axis": "A"},
        {"grid": []},
        {"grid": [4, 4, 8]},
        {"replicates": 0},
        {"S": "six"},
        {"solver": {"iterations": 3}},
        {"solver": {"restarts": 0}},
        {"solver": {"steps": -1}},
        {"family": "random", "expert": {"kind": "stochastic"}},
        {"family": "random", "algorithm": "mimic_md", "expert": {"kind": "stochastic"}},
        {"family": "random", "algorithm": "active_bc", "expert": {"kind": "stochastic"}},
        {"algorithm": "mimic_emp", "expert": {"kind": "stochastic"}},
    ],
)
def test_config_validation(app_config, overrides):
    with pytest.raises(ConfigError):
        experiment(app_config, **overrides)


def test_config_missing_key(app_config):
    data = {k: v for k, v in SMOKE.items() if k != "grid"}
    with pytest.raises(ConfigError):
        parse_experiment_config(data, app_config)


def test_single_replicate(app_config):
    config = experiment(app_config)
    row = run_replicate(config, 1, 2)
    assert (row.num_states, row.num_actions, row.horizon, row.num_trajectories) == (3, 2, 3, 8)
    assert row.replicate == 2
    assert row.status == "ok"
    assert 0.0 <= row.suboptimality <= 3.0
    assert row.pop01 == pytest.approx(row.tv)
    assert row.objective is None and row.epsilon is None
    assert row.wall_ms == 0
    assert run_replicate(config, 1, 2) == row


def test_csv_is_deterministic(app_config):
    config = experiment(app_config)
    text = format_csv(run_experiment(config))
    assert text == format_csv(run_experiment(config))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 3 * 4


def test_workers_do_not_change_rows(app_config):
    assert run_experiment(experiment(app_config, workers=2)) == run_experiment(experiment(app_config))


def test_active_bc_pairs_with_bc(app_config):
    config = experiment(app_config, family="no_interaction", S=4, A=3)
    bc_rows = run_experiment(config)
    active_rows = run_experiment(dataclasses.replace(config, algorithm="active_bc"))
    assert [r.suboptimality for r in bc_rows] == [r.suboptimality for r in active_rows]
    assert [r.seed for r in bc_rows] == [r.seed for r in active_rows]


def test_mimic_md_rows(app_config):
    rows = run_experiment(experiment(app_config, algorithm="mimic_md", grid=[4, 8]))
    for row in rows:
        assert row.status == "ok"
        assert row.epsilon == 0.0
        assert row.objective >= 0.0


def test_mimic_emp_with_stochastic_expert(app_config):
    config = experiment(app_config, family="random", algorithm="mimic_emp", expert={"kind": "stochastic"})
    for row in run_experiment(config):
        assert row.pop01 is None
        assert row.tv is not None


def test_guard_exceeded_rows(app_config):
    config = experiment(app_config, family="random", algorithm="mimic_md", S=4, grid=[2], solver={"guard_bits": 0})
    (row, *_) = run_experiment(config)
    assert row.status == "guard_exceeded"
    assert row.suboptimality is None


def test_timing_column(app_config):
    row = run_replicate(experiment(app_config, timing=True), 0, 0)
    assert row.wall_ms >= 0


def test_read_csv(tmp_path, app_config):
    rows = run_experiment(experiment(app_config, algorithm="mimic_md", grid=[4]))
    path = write_csv(rows, tmp_path / "out" / "rows.csv")
    assert read_csv(path) == rows

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_csv(bad)


@pytest.mark.parametrize("power, slope", [(1.0, -1.0), (0.5, -0.5)])
def test_fit_recovers_power_law(power, slope):
    rows = synthetic_rows({n: 3.0 / n**power for n in (10, 20, 40, 80, 160)})
    fit = fit_rate(rows, "N", resamples=100)
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-9)
    assert fit.ci_low <= fit.slope <= fit.ci_high
    assert [p["x"] for p in fit_to_dict(fit)["points"]] == [10, 20, 40, 80, 160]


def test_fit_bootstrap_interval():
    rng = np.random.default_rng(0)
    rows = [
        dataclasses.replace(row, suboptimality=row.suboptimality * rng.uniform(0.5, 1.5))
        for row in synthetic_rows({n: 1.0 / n for n in (10, 20, 40, 80)}, replicates=20)
    ]
    fit = fit_rate(rows, "N", resamples=300, seed=4)
    assert fit.ci_low <= fit.slope <= fit.ci_high
    assert fit.ci_low < fit.ci_high
    assert fit == fit_rate(rows, "N", resamples=300, seed=4)
    assert all(p.stderr > 0 for p in fit.points)


def test_fit_excludes_nonpositive_means():
    rows = synthetic_rows({5: 0.0, 10: 0.3, 20: 0.15, 40: 0.075})
    fit = fit_rate(rows, "N", resamples=50)
    assert [p.x for p in fit.points if p.excluded] == [5]
    assert fit.slope == pytest.approx(-1.0)
    assert [p["x"] for p in fit_to_dict(fit)["points"]] == [10, 20, 40]


def test_fit_excludes_capped_bound():
    # 4/9 * S * H^2 / N >= H until N > 4/9 * 6 * 10 = 26.7
    rows = synthetic_rows({n: 1.0 / n for n in (10, 20, 40, 80, 160)}, num_states=6, horizon=10)
    fit = fit_rate(rows, "N", bound="bc_expected", resamples=50)
    assert [p.x for p in fit.points if p.excluded] == [10, 20]
    with pytest.raises(InvalidParameter):
        fit_rate(rows, "N", bound="mimic_md_expected")


def test_fit_filters_and_degenerate():
    rows = synthetic_rows({10: 0.1, 20: 0.05, 40: 0.025}) + synthetic_rows({10: 0.5}, algo="mimic_emp")
    assert fit_rate(rows, "N", algo="bc", resamples=50).slope == pytest.approx(-1.0)
    with pytest.raises(DegenerateFit):
        fit_rate(rows, "N", algo="mimic_emp")
    with pytest.raises(DegenerateFit):
        fit_rate(synthetic_rows({10: 0.1, 20: 0.05}), "N")


def test_verify_reduced_suites():
    for report in (
        dp_oracle_suite(instances=20),
        bounds_suite(),
        reduction_suite(triples=100),
        concentration_suite(replicates=2000),
        decomposition_suite(instances=10),
    ):
        assert report.passed, [c for c in report.checks if not c.passed]


def test_finite_differences():
    assert finite_difference_error(3) <= 1e-4


def test_verify_unknown_suite():
    with pytest.raises(InvalidParameter):
        verify("everything")


@pytest.mark.slow
def test_oracle_suite():
    (report,) = verify("dp-oracle")
    assert report.passed


@pytest.mark.slow
def test_solver_suite():
    assert solver_suite(solver=SolverSpec()).passed


def preset_rows(app_config, name: str) -> list[ExperimentResult]:
    return run_experiment(parse_experiment_config(read_experiment_preset(name), app_config, {"workers": 0}))


def means_by(rows: list[ExperimentResult], axis: str) -> dict[int, float]:
    values: dict[int, list[float]] = {}
    for row in rows:
        values.setdefault(row.axis_value(axis), []).append(row.suboptimality)
    return {x: float(np.mean(v)) for x, v in values.items()}


@pytest.mark.slow
def test_bc_rate_in_n(app_config):
    rows = preset_rows(app_config, "bc_rate_n")
    for n, mean in means_by(rows, "N").items():
        assert mean <= bound_bc_expected(6, 10, n)
    assert -1.15 <= fit_rate(rows, "N").slope <= -0.85


@pytest.mark.slow
def test_bc_rate_in_h(app_config):
    rows = preset_rows(app_config, "bc_rate_h")
    assert 1.6 <= fit_rate(rows, "H").slope <= 2.4


@pytest.mark.slow
def test_mimic_emp_rate(app_config):
    rows = preset_rows(app_config, "mimic_emp_rate_n")
    for n, mean in means_by(rows, "N").items():
        assert mean <= bound_mimic_emp(4, 4, n)
    assert fit_rate(rows, "N").slope <= -0.8


@pytest.mark.slow
def test_mimic_md_under_bound(app_config):
    rows = preset_rows(app_config, "mimic_md_known_transition")
    for n, mean in means_by(rows, "N").items():
        assert mean <= bound_mimic_md_expected(6, 6, n)
