import csv
import dataclasses
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from loguru import logger

from imitab.analytics import pop_01_risk, pop_tv_risk
from imitab.datasets import ActiveOracle, index_for, sample_dataset
from imitab.exceptions import ConfigError, SolverGuardExceeded
from imitab.instances import get_family_class, perturb_dynamics
from imitab.learners import active_bc, behavior_cloning, mimic_emp
from imitab.mdp import value
from imitab.mimic_md import fit_mimic_md
from imitab.models import (
    CSV_COLUMNS,
    AppConfig,
    Completion,
    ExperimentConfig,
    ExperimentResult,
    ExpertKind,
    SolverSpec,
)
from imitab.utils.jsonio import load_json
from imitab.utils.rng import child_seed

FAMILIES = ("no_interaction", "known_transition", "random")
ALGORITHMS = ("bc", "mimic_emp", "mimic_md", "active_bc")
SWEEP_AXES = ("N", "H", "S")
# learners that read the expert action off the data as a point mass
DETERMINISTIC_ALGORITHMS = ("bc", "active_bc", "mimic_md")


def _merge_overrides(data: dict, overrides: dict) -> dict:
    merged = dict(data)
    for key, v in overrides.items():
        if v is None:
            continue
        if isinstance(v, dict):
            merged[key] = {**merged.get(key, {}), **v}
        else:
            merged[key] = v
    return merged


def parse_experiment_config(data: dict, app_config: AppConfig, overrides: dict | None = None) -> ExperimentConfig:
    """
    Builds an ExperimentConfig from a JSON document; every non-None entry of `overrides`
    replaces the document's key (dict entries are merged one level deep). Solver and
    worker settings absent from the document come from the application config.
    """
    data = _merge_overrides(data, overrides or {})
    try:
        config = ExperimentConfig(
            family=data["family"],
            algorithm=data["algorithm"],
            sweep_axis=data["sweep_axis"],
            grid=tuple(int(x) for x in data["grid"]),
            num_states=int(data["S"]),
            num_actions=int(data["A"]),
            horizon=int(data["H"]),
            num_trajectories=int(data["N"]),
            replicates=int(data.get("replicates", 1)),
            base_seed=int(data.get("base_seed", 0)),
            expert_kind=ExpertKind(**data.get("expert", {})),
            completion=Completion(**data.get("completion", {})),
            solver=dataclasses.replace(app_config.solver, **data.get("solver", {})),
            planning_noise=float(data.get("planning_noise", 0.0)),
            workers=int(data.get("workers", app_config.workers)),
            timing=bool(data.get("timing", False)),
            output=Path(data["output"]) if data.get("output") else None,
        )
    except KeyError as e:
        raise ConfigError(f"experiment config is missing key {e}")
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed experiment config: {e}")

    if config.family not in FAMILIES:
        raise ConfigError(f"family must be one of {FAMILIES}, got {config.family!r}")
    if config.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {config.algorithm!r}")
    if config.sweep_axis not in SWEEP_AXES:
        raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {config.sweep_axis!r}")
    if len(config.grid) == 0 or any(b <= a for a, b in zip(config.grid, config.grid[1:])):
        raise ConfigError(f"grid must be nonempty and strictly increasing, got {list(config.grid)}")
    if config.replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {config.replicates}")
    if config.solver.restarts < 1 or config.solver.steps < 0:
        raise ConfigError(
            f"solver needs restarts >= 1 and steps >= 0, got {config.solver.restarts} and {config.solver.steps}"
        )
    if config.expert_kind.kind == "stochastic":
        if config.family != "random":
            raise ConfigError(f"{config.family} draws deterministic experts only")
        if config.algorithm in DETERMINISTIC_ALGORITHMS:
            raise ConfigError(f"{config.algorithm} needs a deterministic expert; use mimic_emp")
    return config


def load_experiment_config(path: Path, app_config: AppConfig, overrides: dict | None = None) -> ExperimentConfig:
    return parse_experiment_config(load_json(path), app_config, overrides)


def run_replicate(config: ExperimentConfig, grid_index: int, replicate: int) -> ExperimentResult:
    """
    One row: a fresh instance (and expert) and dataset from child_seed(base, grid index,
    replicate), the learner trained on it, and its suboptimality by exact value DP.
    """
    started = time.perf_counter()
    seed = child_seed(config.base_seed, grid_index, replicate)
    S, A, H, N = config.point(config.grid[grid_index])
    family = get_family_class(config.family)(S, A, H, N, expert_kind=config.expert_kind)
    bundle = family.build(child_seed(seed, 0))
    mdp, expert = bundle.mdp, bundle.expert
    dynamics = mdp.dynamics
    row = dict(
        family=config.family,
        algo=config.algorithm,
        num_states=S,
        num_actions=A,
        horizon=H,
        num_trajectories=N,
        replicate=replicate,
        seed=seed,
    )

    objective = epsilon = None
    try:
        if config.algorithm == "active_bc":
            # same episode seeds as sample_dataset, so the paired BC run sees identical trajectories
            learner = active_bc(dynamics, ActiveOracle(expert), N, child_seed(seed, 1), config.completion)
        else:
            dataset = sample_dataset(dynamics, expert, N, child_seed(seed, 1))
            if config.algorithm == "bc":
                learner = behavior_cloning(index_for(dataset, dynamics, deterministic=True), config.completion)
            elif config.algorithm == "mimic_emp":
                learner = mimic_emp(index_for(dataset, dynamics))
            else:
                planning = (
                    perturb_dynamics(dynamics, config.planning_noise, child_seed(seed, 3))
                    if config.planning_noise > 0
                    else None
                )
                fit = fit_mimic_md(dynamics, dataset, child_seed(seed, 2), config.solver, planning=planning)
                learner, objective, epsilon = fit.policy, fit.objective, fit.epsilon
    except SolverGuardExceeded as e:
        logger.warning(f"grid point {grid_index}, replicate {replicate}: {e}")
        return ExperimentResult(**row, suboptimality=None, pop01=None, tv=None, status="guard_exceeded")

    wall_ms = int((time.perf_counter() - started) * 1000) if config.timing else 0
    return ExperimentResult(
        **row,
        suboptimality=value(mdp, expert) - value(mdp, learner),
        pop01=pop_01_risk(dynamics, expert, learner) if expert.is_deterministic else None,
        tv=pop_tv_risk(dynamics, expert, learner),
        objective=objective,
        epsilon=epsilon,
        wall_ms=wall_ms,
    )


def _run_job(job: tuple[ExperimentConfig, int, int]) -> ExperimentResult:
    return run_replicate(*job)


def run_experiment(config: ExperimentConfig) -> list[ExperimentResult]:
    workers = config.workers if config.workers > 0 else (os.cpu_count() or 1)
    jobs = [(config, g, r) for g in range(len(config.grid)) for r in range(config.replicates)]
    logger.info(
        f"{config.algorithm} on {config.family}: {len(config.grid)} grid points x {config.replicates} replicates, "
        f"{workers} worker(s)"
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_job(job) for job in jobs]

    position = {x: g for g, x in enumerate(config.grid)}
    results.sort(key=lambda row: (position[row.axis_value(config.sweep_axis)], row.replicate))
    for x in config.grid:
        subopt = [r.suboptimality for r in results if r.axis_value(config.sweep_axis) == x and r.status == "ok"]
        if subopt:
            logger.debug(f"{config.sweep_axis}={x}: mean suboptimality {np.mean(subopt):.6g} over {len(subopt)} rows")
    logger.info(f"finished {len(results)} rows")
    return results


def _format_cell(cell) -> str:
    if cell is None:
        return ""
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)


def format_csv(results: list[ExperimentResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for result in results:
        writer.writerow([_format_cell(cell) for cell in result.as_row()])
    return buffer.getvalue()


def write_csv(results: list[ExperimentResult], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_csv(results))
    return path


def read_csv(path: Path) -> list[ExperimentResult]:
    def number(text: str, kind=float):
        return kind(text) if text != "" else None

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path} does not carry the experiment CSV header")
        return [
            ExperimentResult(
                family=row["family"],
                algo=row["algo"],
                num_states=int(row["S"]),
                num_actions=int(row["A"]),
                horizon=int(row["H"]),
                num_trajectories=int(row["N"]),
                replicate=int(row["replicate"]),
                seed=int(row["seed"]),
                suboptimality=number(row["suboptimality"]),
                pop01=number(row["pop01"]),
                tv=number(row["tv"]),
                objective=number(row["objective"]),
                epsilon=number(row["epsilon"]),
                status=row["status"],
                wall_ms=int(row["wall_ms"]),
            )
            for row in reader
        ]
